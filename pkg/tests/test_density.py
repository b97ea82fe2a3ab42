import math

import numpy as np
import pytest

from density import (bessel_contributions, bessel_witness, density_verdict, formal_dim_numeric,
                     lattice_contributions, periodization_check, verdict_sweep)
from errors import DomainError
from fuchsian import enumerate_ball, hecke_group, modular_group
from hardy import Wavelet
from wavelet import ZERO_TRANSFORM, coherent_state, wspace_inner

PSI = Wavelet(0, 2.0)


# ─── verdicts ─────────────────────────────────────────────────────────────────
def test_modular_alpha2_is_riesz_side():
    v = density_verdict(modular_group(), 2.0, 0)
    assert v.covolume == pytest.approx(math.pi / 3, abs=1e-6)
    assert v.formal_dimension == 1.0
    assert v.product == pytest.approx(math.pi / 3, abs=1e-6)
    assert not v.frame_admissible and v.riesz_admissible
    assert v.abdm_bound == pytest.approx(2.0)
    assert v.sharp_bound == pytest.approx(1.0)
    assert v.abdm_admissible


def test_modular_alpha1_is_frame_side():
    v = density_verdict(modular_group(), 1.0, 0)
    assert v.product == pytest.approx(math.pi / 6, abs=1e-6)
    assert v.frame_admissible and not v.riesz_admissible
    assert v.threshold_alpha == pytest.approx(6 / math.pi, abs=1e-5)


def test_balanced_covolume_admits_both():
    v = density_verdict(2.0, 1.0)
    assert v.group == "covolume"
    assert v.product == 1.0
    assert v.frame_admissible and v.riesz_admissible
    assert any("Existence" in note for note in v.notes)


@pytest.mark.parametrize("target, alpha, n", [(0.0, 1.0, 0), (-1.0, 1.0, 0), (2.0, 0.0, 0),
                                              (2.0, 1.0, -1), (2.0, 1.0, 0.5)])
def test_verdict_rejects_bad_inputs(target, alpha, n):
    with pytest.raises(DomainError):
        density_verdict(target, alpha, n)


def test_verdict_sweep_tables():
    table, summary = verdict_sweep([modular_group(), hecke_group(4)], [1.0, 2.0])
    assert len(table) == 4
    assert list(summary["group"]) == ["modular", "hecke:4"]
    hecke = summary.set_index("group").loc["hecke:4"]
    assert hecke["covolume"] == pytest.approx(math.pi / 2, abs=1e-5)
    assert hecke["frame_share"] == pytest.approx(0.5)
    with pytest.raises(DomainError):
        verdict_sweep([], [1.0])


# ─── lattice sums ─────────────────────────────────────────────────────────────
def test_zero_function_gives_zero_sums():
    group = modular_group()
    W = coherent_state(PSI, 1j)
    zero = W.scaled(0.0)
    per_gamma = lattice_contributions(zero, W, enumerate_ball(group, 2), group.domain())
    assert np.all(per_gamma == 0.0)
    report = periodization_check(zero, W, group, 1)
    assert report.lhs == 0.0 and report.rhs == 0.0 and report.relerr == 0.0


def test_lattice_contributions_are_nonnegative():
    group = modular_group()
    ball = enumerate_ball(group, 3)
    W = coherent_state(PSI, 1j)
    per_gamma = lattice_contributions(W, W, ball, group.domain())
    assert per_gamma.shape == (len(ball),)
    assert np.all(per_gamma >= 0)
    assert per_gamma[0] > 0


@pytest.mark.slow
def test_periodization_modular():
    W = coherent_state(PSI, 1j)
    report = periodization_check(W, W, modular_group(), 8)
    target = abs(wspace_inner(W, W)) ** 2 / 1.0
    assert report.lhs == pytest.approx(target, rel=5e-2)
    assert report.relerr < 5e-2
    assert report.word_length == 8 and report.cusp_height == 10.0
    assert report.notes[0].startswith("cusp above")


def test_periodization_flags_short_ball():
    W = coherent_state(PSI, 1j)
    report = periodization_check(W, W, modular_group(), 1, tolerance=1e-6)
    assert report.ball_size == 4
    assert any("relative error" in note for note in report.notes)


def test_bessel_witness():
    group = modular_group()
    W = coherent_state(PSI, 1j)
    probes = [W, coherent_state(PSI, 0.5 + 2j)]
    table = bessel_contributions(W, group, 3, probes)
    assert set(table["probe"]) == {0, 1}
    witness = bessel_witness(W, group, 3, probes)
    assert witness == pytest.approx(table.groupby("probe")["contribution"].sum().max())
    # the identity term alone is ||W||^2 for the normalized probe W / ||W||
    assert witness >= abs(wspace_inner(W, W)) - 1e-9
    with pytest.raises(DomainError):
        bessel_witness(W, group, 1, [])
    with pytest.raises(DomainError):
        bessel_witness(W, group, 1, [ZERO_TRANSFORM])


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.0, 2.0, 4.0])
@pytest.mark.parametrize("n", [0, 1])
def test_formal_dimension_by_averaging(n, alpha):
    assert formal_dim_numeric(n, alpha) == pytest.approx(alpha / 2, rel=1e-2)


def test_verdict_flips_at_threshold():
    group = modular_group()
    threshold = density_verdict(group, 1.0).threshold_alpha
    assert threshold == pytest.approx(6 / math.pi, abs=1e-5)
    assert density_verdict(group, threshold - 1e-9).frame_admissible
    assert not density_verdict(group, threshold + 1e-9).frame_admissible


@pytest.mark.parametrize("n", [0, 1, 3])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 5.0])
def test_abdm_bound_exceeds_sharp_bound(n, alpha):
    v = density_verdict(1.0, alpha, n)
    assert v.abdm_bound > v.sharp_bound


def test_verdict_trichotomy_on_random_covolumes():
    rng = np.random.default_rng(5)
    for vol, alpha in zip(rng.uniform(0.1, 10.0, 200), rng.uniform(0.1, 5.0, 200)):
        v = density_verdict(float(vol), float(alpha))
        assert v.frame_admissible or v.riesz_admissible
        assert (v.frame_admissible and v.riesz_admissible) == (abs(v.product - 1.0) <= 1e-12)


@pytest.mark.slow
def test_periodization_error_shrinks_with_ball():
    W = coherent_state(PSI, 1j)
    short = periodization_check(W, W, modular_group(), 4)
    long = periodization_check(W, W, modular_group(), 8)
    assert long.relerr < short.relerr


@pytest.mark.parametrize("n, alpha", [(0, 2.0), (1, 1.5)])
def test_formal_dimension_ignores_window_amplitude(n, alpha):
    plain = formal_dim_numeric(n, alpha, method="closed")
    tripled = formal_dim_numeric(n, alpha, scale=3.0, method="closed")
    assert tripled == pytest.approx(plain, rel=1e-10)
