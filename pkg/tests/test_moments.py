import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blowuplab.criteria import const_C0
from blowuplab.errors import (
    BadSpec,
    HypothesisViolated,
    InvalidParams,
    NonFiniteField,
    NonFiniteParticle,
)
from blowuplab.moments import (
    ConstantViscosity,
    Drag,
    FluidField,
    GaussianBump,
    GlobalAlignment,
    InitialDataSpec,
    LocalAlignment,
    MaxwellianParticles,
    ModelParams,
    MomentVector,
    MonoKineticParticles,
    ParticleCloud,
    PowerLawViscosity,
    TabulatedField,
    TabulatedParticles,
    UniformBump,
    assemble_J,
    build_initial_data,
    check_hypotheses,
    cic_stencil,
    deposit_density,
    fluid_moments,
    gamma_half_integer,
    particle_moments,
    read_field_csv,
    state_moments,
    unit_ball_volume,
    write_field_csv,
    write_particles_csv,
)

G2 = ModelParams(1, 2.0)
G15 = ModelParams(1, 1.5)


def bump_field(n=400):
    # faces at +-1 so the support is resolved exactly
    return build_initial_data(InitialDataSpec((-2.0, 2.0), n, UniformBump(0.5, 1.0, 1.0)), G2)[0]


# ---- gamma function ---------------------------------------------------------


@pytest.mark.parametrize(
    "two_x, value",
    [(3, math.sqrt(math.pi) / 2), (4, 1.0), (5, 3 * math.sqrt(math.pi) / 4), (1, math.sqrt(math.pi)),
     (12, 120.0)],
)
def test_gamma_half_integer(two_x, value):
    assert gamma_half_integer(two_x) == pytest.approx(value, rel=1e-15)


def test_gamma_half_integer_matches_math_gamma():
    for two_x in range(1, 40):
        assert gamma_half_integer(two_x) == pytest.approx(math.gamma(two_x / 2), rel=1e-13)


def test_gamma_half_integer_rejects_zero():
    with pytest.raises(InvalidParams):
        gamma_half_integer(0)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


# ---- fluid moments ----------------------------------------------------------


def test_uniform_bump_moments():
    mv = fluid_moments(bump_field(), G2)
    assert mv.m_rho == pytest.approx(1.0, rel=1e-14)
    assert mv.M_rho == pytest.approx(0.0, abs=1e-14)
    # midpoint error on x^2 is -dx^2/12 per unit length
    assert mv.W_rho == pytest.approx(1 / 3, rel=1e-4)
    assert mv.I_rho == pytest.approx(1 / 6, rel=1e-4)
    assert mv.E_k == pytest.approx(1 / 6, rel=1e-4)
    assert mv.E_i == pytest.approx(0.5, rel=1e-14)


def test_uniform_bump_J0():
    mv = fluid_moments(bump_field(), G2)
    assert mv.J == pytest.approx(1 / 6 - 1 / 3 + 1 / 6 + 1 / 2, rel=1e-4)


def test_zero_field_moments():
    mv = fluid_moments(FluidField.zeros(-1, 1, 16), G15)
    assert all(v == 0 for v in mv.as_dict().values() if v is not None)


def test_gaussian_mass():
    spec = InitialDataSpec((-10.0, 10.0), 4096, GaussianBump(1.0, 1.0))
    mv = fluid_moments(build_initial_data(spec, G15)[0], G15)
    assert mv.m_rho == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)
    # second moment: I = 1/2 int x^2 rho = sqrt(2 pi) / 2
    assert mv.I_rho == pytest.approx(math.sqrt(2 * math.pi) / 2, rel=1e-6)


def test_nonfinite_field_rejected():
    rho = np.ones(8)
    rho[3] = np.nan
    with pytest.raises(NonFiniteField):
        fluid_moments(FluidField(0, 1, rho, np.zeros(8)), G15)


def test_quadrature_second_order():
    # smooth non-periodic profile on (0, 1): midpoint error ~ dx^2
    def errs(n):
        f = FluidField.zeros(0.0, 1.0, n)
        f = FluidField(0.0, 1.0, np.exp(f.x), f.x)
        mv = fluid_moments(f, G2)
        exact_I = 0.5 * (math.e - 2.0)  # 1/2 int x^2 e^x
        exact_W = math.e - 2.0  # int (e^x x) x
        return abs(mv.I_rho - exact_I), abs(mv.W_rho - exact_W)

    e1, e2 = errs(64), errs(128)
    for a, b in zip(e1, e2):
        assert 3.9 < a / b < 4.1


def test_alpha_weighted_moments():
    f = bump_field()
    fa = FluidField(f.x_lo, f.x_hi, f.rho, f.u, np.full(f.n, 0.5))
    mv = fluid_moments(fa, G2)
    assert mv.m_rho_a == pytest.approx(0.5 * mv.m_rho)
    assert mv.J_alpha == pytest.approx(0.5 * mv.J)


# ---- particle moments -------------------------------------------------------


def test_single_particle():
    mv = particle_moments(ParticleCloud([2.0], [3.0], [1.0]))
    assert (mv.m_f, mv.M_f, mv.W_f, mv.I_f, mv.E_f) == (1.0, 3.0, 6.0, 2.0, 4.5)


def test_empty_cloud():
    mv = particle_moments(ParticleCloud.empty())
    assert (mv.m_f, mv.M_f, mv.W_f, mv.I_f, mv.E_f) == (0.0,) * 5


def test_maxwellian_energy_monte_carlo():
    n = 100_000
    spec = InitialDataSpec((-50, 50), 64, None, MaxwellianParticles(1.0, 0.0, 1.0, 1.0), n, seed=7)
    _, cloud = build_initial_data(spec, G15)
    mv = particle_moments(cloud)
    sigma = 0.5 * math.sqrt(2.0) / math.sqrt(n)  # std of mean of v^2/2
    assert abs(mv.E_f - 0.5) < 3 * sigma
    assert mv.m_f == pytest.approx(1.0, rel=1e-12)


def test_nonfinite_particle_rejected():
    with pytest.raises(NonFiniteParticle):
        particle_moments(ParticleCloud([0.0], [np.inf], [1.0]))


def test_particle_cloud_validation():
    with pytest.raises(InvalidParams):
        ParticleCloud([0.0], [0.0], [-1.0])
    with pytest.raises(InvalidParams):
        ParticleCloud([0.0, 1.0], [0.0], [1.0])


def test_fluid_field_validation():
    with pytest.raises(InvalidParams):
        FluidField(0, 1, [1.0, -1.0], [0.0, 0.0])
    with pytest.raises(InvalidParams):
        FluidField(0, 1, [1.0, 1.0], [0.0, 0.0], alpha=[0.5, 1.5])


# ---- J ----------------------------------------------------------------------


def test_assemble_J_direct():
    assert assemble_J(MomentVector(I_rho=1.0, E_k=2.0)) == 3.0
    assert assemble_J(MomentVector()) == 0.0
    mv = MomentVector(t=1.0, I_rho=1.0, W_rho=1.0, E_i=1.0)
    assert assemble_J(mv) == 1.0 - 2.0 + 4.0


def test_assemble_J_weighted_requires_alpha():
    with pytest.raises(InvalidParams):
        assemble_J(MomentVector(), weighted=True)


def test_combine_adds_phases():
    f = bump_field()
    c = ParticleCloud([0.5], [1.0], [2.0])
    mv = state_moments(f, c, G2)
    assert mv.m_f == 2.0 and mv.m_rho == pytest.approx(1.0)
    assert mv.M == pytest.approx(mv.M_rho + 2.0)


# ---- hypotheses -------------------------------------------------------------


def test_density_linear_drag_passes():
    rep = check_hypotheses(ModelParams(1, 1.5, drag=Drag("density_linear")))
    assert rep.drag == "pass" and rep.ok


def test_anti_drag_fails_with_witness():
    with pytest.raises(HypothesisViolated) as exc:
        check_hypotheses(ModelParams(1, 1.5, drag=Drag("linear", coefficient=-1.0)))
    assert exc.value.name == "drag-dissipation"
    assert exc.value.witness["D.y"] < 0


def test_power_law_viscosity_relation():
    rep = check_hypotheses(ModelParams(1, 1.5, PowerLawViscosity(1.0, 1.5)))
    assert rep.viscosity == "pass"
    assert any("rho**1.5" in n or "rho**(3/2)" in n for n in rep.notes)


def test_constant_viscosity_not_applicable():
    rep = check_hypotheses(ModelParams(1, 1.5, ConstantViscosity(1.0, 0.0)))
    assert rep.viscosity == "not-applicable"


def test_collisions_by_construction():
    for op in (LocalAlignment(1.0), GlobalAlignment("gaussian", 1.0, 1.0)):
        assert check_hypotheses(ModelParams(1, 1.5, collision=op)).collision == "by-construction"


def test_params_validation():
    with pytest.raises(InvalidParams):
        ModelParams(1, 1.0)
    with pytest.raises(InvalidParams):
        ModelParams(1, 1.5, PowerLawViscosity(1.0, 2.0))
    with pytest.raises(InvalidParams):
        Drag("quadratic")


# ---- initial data -----------------------------------------------------------


def test_seeded_clouds_identical():
    spec = InitialDataSpec((-5, 5), 64, None, MaxwellianParticles(), 500, seed=3)
    a = build_initial_data(spec, G15)[1]
    b = build_initial_data(spec, G15)[1]
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.v, b.v)


def test_monokinetic_grid_placement():
    spec = InitialDataSpec((-8, 8), 128, None, MonoKineticParticles(2.0, 0.0, 1.0, 0.5, 0.0, "grid"))
    f, c = build_initial_data(spec, G15)
    assert c.mode == "monokinetic" and len(c) == 128
    assert c.w.sum() == pytest.approx(2.0, rel=1e-9)
    np.testing.assert_allclose(c.v, 0.5)


def test_particle_volume_sets_alpha():
    spec = InitialDataSpec((-5, 5), 100, GaussianBump(), MaxwellianParticles(0.5, 0, 1, 0.1), 2000,
                           seed=1, particle_volume=0.1)
    f, c = build_initial_data(spec, G15)
    assert f.alpha is not None
    np.testing.assert_allclose(f.alpha, 1.0 - 0.1 * deposit_density(c, f))


def test_overfull_volume_fraction_rejected():
    spec = InitialDataSpec((-1, 1), 16, GaussianBump(), MaxwellianParticles(50.0, 0, 0.1, 0.1), 200,
                           particle_volume=1.0)
    with pytest.raises(BadSpec):
        build_initial_data(spec, G15)


def test_tabulated_roundtrip(tmp_path):
    f = bump_field(40)
    path = tmp_path / "field.csv"
    write_field_csv(path, f)
    g = read_field_csv(path)
    assert g.x_lo == pytest.approx(f.x_lo) and g.x_hi == pytest.approx(f.x_hi)
    np.testing.assert_array_equal(g.rho, f.rho)
    spec = InitialDataSpec(fluid=TabulatedField(str(path)))
    h = build_initial_data(spec, G2)[0]
    assert fluid_moments(h, G2).m_rho == pytest.approx(1.0)


def test_tabulated_particles(tmp_path):
    path = tmp_path / "p.csv"
    write_particles_csv(path, ParticleCloud([0.0, 1.0], [1.0, 2.0], [0.5, 0.5]))
    spec = InitialDataSpec((-2, 2), 8, None, TabulatedParticles(str(path)))
    c = build_initial_data(spec, G15)[1]
    assert particle_moments(c).M_f == pytest.approx(1.5)


@pytest.mark.parametrize(
    "text",
    ["x,rho\n0,1\n1,1\n", "x,rho,u\n0,1,0\n1,1,0\n3,1,0\n", "x,rho,u\n1,1,0\n0,1,0\n",
     "x,rho,u\n0,a,0\n1,1,0\n", "x,rho,u\n0,-1,0\n1,1,0\n"],
)
def test_bad_field_tables(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(BadSpec):
        read_field_csv(path)


# ---- cloud-in-cell ----------------------------------------------------------


def test_deposit_conserves_mass():
    f = FluidField.zeros(-1, 1, 20)
    rng = np.random.default_rng(0)
    c = ParticleCloud(rng.uniform(-1, 1, 300), np.zeros(300), rng.uniform(0, 1, 300))
    assert deposit_density(c, f).sum() * f.dx == pytest.approx(c.w.sum(), rel=1e-13)


def test_cic_stencil_at_centres():
    idx, frac = cic_stencil(np.array([0.125, 0.375, 0.5]), 0.0, 0.25, 8)
    np.testing.assert_array_equal(idx, [0, 1, 1])
    np.testing.assert_allclose(frac, [0.0, 0.0, 0.5])


# ---- properties ---------------------------------------------------------------

densities = arrays(np.float64, st.integers(8, 64), elements=st.floats(0.0, 10.0))


def random_state(rho, seed, gamma=1.5):
    rng = np.random.default_rng(seed)
    n = rho.size
    f = FluidField(-3.0, 3.0, rho, rng.normal(0, 2, n))
    c = ParticleCloud(rng.uniform(-3, 3, 20), rng.normal(0, 1, 20), rng.uniform(0, 1, 20))
    return f, c, ModelParams(1, gamma)


@settings(max_examples=80, deadline=None)
@given(densities, st.integers(0, 2**31 - 1))
def test_cauchy_schwarz_chain(rho, seed):
    f, c, p = random_state(rho, seed)
    mv = state_moments(f, c, p)
    tol = 1e-12
    assert mv.M_rho**2 <= 4.0 * mv.m_rho * mv.E_k * (1 + tol) + 1e-300
    assert mv.M**2 <= 4.0 * max(mv.m_rho, mv.m_f) * (mv.E_k + mv.E_f) * (1 + tol) + 1e-300
    assert mv.W_rho**2 <= 4.0 * mv.I_rho * mv.E_k * (1 + tol) + 1e-300
    assert mv.W_f**2 <= 4.0 * mv.I_f * mv.E_f * (1 + tol) + 1e-300


@settings(max_examples=80, deadline=None)
@given(densities, st.integers(0, 2**31 - 1), st.floats(0.0, 5.0))
def test_J_dominates_internal_energy(rho, seed, t):
    f, c, p = random_state(rho, seed)
    mv = state_moments(f, c, p, t)
    assert mv.J >= (t + 1) ** 2 * mv.E_i * (1 - 1e-12) - 1e-12 * abs(mv.J)


@settings(max_examples=80, deadline=None)
@given(densities, st.sampled_from([1.2, 1.5, 1.9]))
def test_internal_energy_lower_bound(rho, gamma):
    p = ModelParams(1, gamma)
    mv = fluid_moments(FluidField(-3.0, 3.0, rho, np.zeros(rho.size)), p)
    if mv.I_rho > 0:
        assert mv.E_i >= const_C0(mv.m_rho, 1, gamma) / mv.I_rho ** (0.5 * p.k) * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(densities, st.floats(0.0, 1.0))
def test_alpha_weighted_lower_bound(rho, a):
    p = ModelParams(1, 1.5)
    f = FluidField(-3.0, 3.0, rho, np.zeros(rho.size), np.full(rho.size, a))
    mv = fluid_moments(f, p)
    if mv.I_rho_a > 0:
        assert mv.E_i_a >= const_C0(mv.m_rho_a, 1, 1.5) / mv.I_rho_a ** (0.5 * p.k) * (1 - 1e-12)
