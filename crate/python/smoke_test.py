"""Smoke test for the meddit_py extension module."""

import meddit_py as md


def main():
    pts = md.PointSet.dense([[0.0], [1.0], [10.0]])
    assert len(pts) == 3 and pts.kind == "dense" and pts.dim == 1
    assert md.distance(pts, 0, 2) == 10.0
    r = md.meddit(pts, metric="l1", seed=0)
    assert r.medoid_index == 1, r

    points = md.gen_gaussian_points(200, 10, seed=3)
    truth = md.brute_force_medoid(points, metric="l2")
    assert truth.stopped_by == "exhaustive"
    assert truth.total_evaluations == 200 * 199
    fast = md.meddit(points, metric="l2", seed=1, workers=2)
    assert fast.medoid_index == truth.medoid_index
    assert max(fast.per_arm_pulls) <= 2 * 199
    assert fast.search_evaluations < truth.total_evaluations
    assert md.meddit(points, metric="l2", seed=1).medoid_index == fast.medoid_index
    assert md.meddit(points, metric="l2", catoni=True, seed=1).medoid_index == truth.medoid_index

    r = md.rand_medoid(points, 8, metric="l2", seed=0)
    assert r.stopped_by == "budget" and r.total_evaluations == 200 * 8

    adv, planted = md.gen_adversarial(50, seed=2)
    assert md.brute_force_medoid(adv).medoid_index == planted

    prior, theta = md.gen_gaussian_prior(100, 20.0, seed=4)
    assert prior.kind == "matrix" and len(theta) == 100
    delta_theorem = md.meddit(prior, delta=None, sigma=(0.5 + 1.0) ** 0.5, seed=0)
    assert delta_theorem.sigma is not None

    budgets, errors = md.error_curve(points, "rand", [1, 16], 10, metric="l2")
    assert budgets == [1, 16] and len(errors) == 2
    avg, worst, failures = md.stopping_stats(points, 5, metric="l2")
    assert avg > 0 and worst >= avg and failures <= 5

    assert abs(md.confidence_radius(1.0, 0.1, 20) - (2 * __import__("math").log(20) / 20) ** 0.5) < 1e-12
    assert abs(md.catoni_estimate([1.0] * 50, 1.0, 0.05) - 1.0) < 1e-9

    try:
        md.PointSet.matrix([[0.0, 1.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-square matrix accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
