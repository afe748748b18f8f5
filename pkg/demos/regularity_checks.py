"""Run the regularity suites against the shipped kernel families.

The moment-condition and L1-section checks accept the bandwidth and
histogram families; the trigonometric family has no order-uniform L1
bound, so its report routes to the spectral trend test instead.  Margins
are slack: positive means the condition holds with room to spare.
"""

from pcoselect import (
    GAUSSIAN,
    BasisFamily,
    BasisKind,
    Density,
    DensityKind,
    LossKind,
    check_kernel_moment_conditions,
    check_l1_section_bound,
    check_legendre_boundedness,
    check_sine_tail_bound,
    check_trig_spectral_boundedness,
    make_bandwidth_family,
    make_projection_family,
    scenario_from_config,
)

scn = scenario_from_config(
    {
        "d": 1,
        "f": "uniform",
        "b": {"kind": "polynomial"},
        "sigma": {"kind": "constant", "c": 0.3},
        "noise": "gaussian",
        "n": 100,
        "replications": 1,
        "seed": 5,
    }
)

fam_bw = make_bandwidth_family(GAUSSIAN, 0.05, (0.05, 0.15, 0.4), d=1, n=100)
fam_hist = make_projection_family(BasisFamily(BasisKind.REGULAR_HISTOGRAM, m_cap=8), 8, d=1, n=100)
fam_trig = make_projection_family(BasisFamily(BasisKind.TRIGONOMETRIC, m_cap=16), 16, d=1, n=100)


def show(label, rep):
    if not rep.applicable:
        print(f"{label:<34} not applicable -> {rep.notes[0][:60]}...")
        return
    status = "ok" if rep.passed else "FAILED"
    print(f"{label:<34} {status}  margin {rep.margin:.4g}")


show("moment conditions / bandwidth", check_kernel_moment_conditions(fam_bw, scn, LossKind.IDENTITY, draws=20_000, seed=1))
show("moment conditions / histogram", check_kernel_moment_conditions(fam_hist, scn, LossKind.IDENTITY, draws=20_000, seed=1))
show("L1 section bound / bandwidth", check_l1_section_bound(fam_bw))
show("L1 section bound / histogram", check_l1_section_bound(fam_hist))
show("L1 section bound / trig", check_l1_section_bound(fam_trig))
show("spectral trend / trig", check_trig_spectral_boundedness(scn, LossKind.IDENTITY, draws=4000, seed=2))
show("sine tail inequality", check_sine_tail_bound(p_max=100, grid_points=4000))
show(
    "Legendre bound / raised cosine",
    check_legendre_boundedness(Density(DensityKind.RAISED_COSINE, -1.0, 1.0), m_max=40),
)
