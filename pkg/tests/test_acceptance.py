"""Acceptance criteria, one test per criterion.

Every check is an exact symbolic identity in the precision-tracked ring; the
stated sample counts and signatures are minimums taken literally.  Each test
prints one line so a verbose run reads as a checklist.
"""

import time

from superbv.bvcalc import (
    DeltaOperator,
    bv_bracket,
    check_bv_axioms,
    dbar_int,
    eta,
    extend_delta,
    manin_delta,
    manin_gamma,
    manin_gamma_inverse,
    partial_int,
    project_strong,
    projected_apply,
    pull_intform,
    pull_delta_table,
)
from superbv.charts import BerSection, Chart
from superbv.connect import (
    bv_connection,
    ber_from_tangent,
    check_cy_consistency,
    check_sdet_transport,
    is_flat,
    solve_delta_formula,
    transform_christoffel,
)
from superbv.dsl import parse, parse_expression, render_value
from superbv.jetring import GaussianRational, JetSuperFunction, RingSignature
from superbv.mvforms import MultiVectorForm, pull_mvform, schouten, wedge
from superbv.report import build_report
from superbv.samples import SampleGen
from superbv.suites import run_suites, _connection_covariance_witness

CAP = 4
SIG11 = Chart(RingSignature(1, 1, CAP))
SIG21 = Chart(RingSignature(2, 1, CAP))
SIG22 = Chart(RingSignature(2, 2, CAP))
ALL_CHARTS = (SIG11, SIG21, SIG22)


def _report(name: str, ok: bool, start: float, detail: str = "") -> None:
    elapsed = time.perf_counter() - start
    status = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"[{status}] {name} ({elapsed:.1f}s){suffix}")
    assert ok, f"{name}{suffix}"


def _omega_family(chart: Chart):
    """The three trivialising sections fixed by the acceptance criteria."""
    one = chart.one()
    z1 = chart.coordinate(0)
    omegas = [BerSection(chart, one), BerSection(chart, one + z1)]
    third = one + z1
    if chart.sig.n >= 2:
        third = third + chart.coordinate(0) * chart.coordinate(1)
    else:
        third = third + z1 * z1
    omegas.append(BerSection(chart, third))
    return omegas


def _sample_pair(gen: SampleGen, chart: Chart):
    """Homogeneous pair with p + p' <= 4 and q + q' <= 2."""
    alpha, p, q, _ = gen.homogeneous_mvform(chart, max_p=2, max_q=1)
    beta, r, s, _ = gen.homogeneous_mvform(chart, max_p=2, max_q=1)
    assert p + r <= 4 and q + s <= 2
    return alpha, p + q, beta


def test_tian_todorov_suite():
    start = time.perf_counter()
    gen = SampleGen(101)
    ok = True
    for chart in ALL_CHARTS:
        omegas = _omega_family(chart)
        for trial in range(25):
            omega = omegas[trial % 3]
            delta = DeltaOperator.from_section(omega)
            alpha, deg_a, beta = _sample_pair(gen, chart)
            lhs = -schouten(alpha, beta)
            rhs = bv_bracket(lambda x: extend_delta(delta, x), alpha, beta, deg_a)
            if not lhs.agrees_with(rhs):
                ok = False
                break
    _report("tian_todorov: bracket compatibility of the BV operator, "
            "3 signatures x 25 pairs x 3 sections", ok, start)


def test_dgbv_suite():
    start = time.perf_counter()
    gen = SampleGen(103)
    ok = True
    first_failure = ""
    for chart in ALL_CHARTS:
        omega = _omega_family(chart)[2]
        delta = DeltaOperator.from_section(omega)
        apply = lambda x: extend_delta(delta, x)
        samples = []
        for index in range(25):
            alpha, p, q, pa = gen.homogeneous_mvform(chart, max_p=2, max_q=1)
            beta, r, s, pb = gen.homogeneous_mvform(chart, max_p=1, max_q=1)
            gamma, *_ = gen.homogeneous_mvform(chart, max_p=1, max_q=1)
            samples.append({"alpha": alpha, "beta": beta, "gamma": gamma,
                            "alpha_deg": p + q, "alpha_parity": pa,
                            "beta_deg": r + s, "beta_parity": pb, "seed": index})
        for item in check_bv_axioms(chart, apply, samples):
            if item["status"] != "pass":
                ok = False
                first_failure = f"{chart.sig.n}|{chart.sig.m} {item['check']}"
    _report("dgbv: squared BV operator, dbar anticommutation, derivation and "
            "bracket identities, 25 triples per signature", ok, start, first_failure)


def test_integral_form_suite():
    start = time.perf_counter()
    gen = SampleGen(107)
    ok = True
    detail = ""
    for chart in ALL_CHARTS:
        for _ in range(25):
            alpha, *_ = gen.homogeneous_mvform(chart)
            sigma = eta(gen.trivialising_section(chart), alpha)
            if not partial_int(partial_int(sigma)).is_zero():
                ok, detail = False, "divergence squared"
            anti = partial_int(dbar_int(sigma)) + dbar_int(partial_int(sigma))
            if not anti.is_zero():
                ok, detail = False, "dbar anticommutation"
    for chart in (SIG11, SIG21):
        for _ in range(10):
            phi = gen.invertible_morphism(chart)
            alpha, *_ = gen.homogeneous_mvform(phi.target, max_p=2, max_q=1)
            sigma = eta(BerSection(phi.target, phi.target.one()), alpha)
            lhs = pull_intform(phi, partial_int(sigma))
            rhs = partial_int(pull_intform(phi, sigma))
            if not lhs.agrees_with(rhs):
                ok, detail = False, "coordinate covariance"
    broken = 0
    for _ in range(25):
        alpha, *_ = gen.homogeneous_mvform(SIG11)
        sigma = eta(gen.trivialising_section(SIG11), alpha)
        anti = partial_int(dbar_int(sigma), drop_form_sign=True) \
            + dbar_int(partial_int(sigma, drop_form_sign=True))
        if not anti.is_zero():
            broken += 1
    if broken == 0:
        ok, detail = False, "negative control never fired"
    _report("integral forms: divergence squared, dbar anticommutation, covariance, "
            "negative sign control", ok, start, detail)


def test_supermatrix_suite():
    start = time.perf_counter()
    gen = SampleGen(109)
    ok = True
    detail = ""
    for chart in ALL_CHARTS:
        for _ in range(25):
            phi = gen.invertible_morphism(chart)
            psi = gen.invertible_morphism(chart)
            m, n = phi.differential(), psi.differential()
            if not (m * n).sdet().agrees_with(m.sdet() * n.sdet()):
                ok, detail = False, "multiplicativity"
            if not m.supertranspose().sdet().agrees_with(m.sdet()):
                ok, detail = False, "supertranspose invariance"
        for _ in range(25):
            phi = gen.invertible_morphism(chart)
            d = phi.differential()
            sdet, d_inv = d.sdet(), d.inverse()
            for k in range(chart.dim):
                px = chart.parity(k)
                rhs = chart.zero()
                for mr in range(chart.dim):
                    for nr in range(chart.dim):
                        pm, pn = chart.parity(mr), chart.parity(nr)
                        term = sdet * d_inv.rows[mr][nr] * chart.d(d.rows[nr][mr], k)
                        if (pm + px * (pm + pn)) % 2:
                            term = -term
                        rhs = rhs + term
                if not chart.d(sdet, k).agrees_with(rhs):
                    ok, detail = False, "derivative expansion"
                acc = chart.zero()
                for j in range(chart.dim):
                    acc = acc + chart.d(sdet * d_inv.rows[j][k], j)
                if not acc.is_zero():
                    ok, detail = False, "divergence sum"
    _report("graded matrices: sdet multiplicativity, supertranspose invariance, "
            "derivative expansion and divergence sum at (1|1), (2|1), (2|2)",
            ok, start, detail)


def test_connection_suite():
    start = time.perf_counter()
    gen = SampleGen(113)
    ok = True
    detail = ""
    flat_count = 0
    for chart in (SIG11, SIG21):
        for _ in range(5):
            omega = gen.trivialising_section(chart)
            table = DeltaOperator.from_section(omega)
            if not is_flat(bv_connection(table)):
                ok, detail = False, "curvature"
            flat_count += 1
            h = omega.coefficient
            conn = bv_connection(table)
            for k in range(chart.dim):
                if not (chart.d(h, k) + h * conn.coefficients[k]).is_zero():
                    ok, detail = False, "parallel section equation"
            solved = solve_delta_formula(table)
            recovered = DeltaOperator.from_section(BerSection(chart, solved))
            if not all(a.agrees_with(b) for a, b in zip(recovered.values, table.values)):
                ok, detail = False, "table round trip"
            scaled = solved.scale(GaussianRational.of(7))
            factor = scaled * solved.invert()
            f_inv = factor.invert()
            if not all((f_inv * chart.d(factor, k)).is_zero() for k in range(chart.dim)):
                ok, detail = False, "constant ambiguity"
    assert flat_count >= 10
    for chart in (SIG11, SIG21):
        for _ in range(5):
            phi = gen.invertible_morphism(chart)
            omega = gen.trivialising_section(phi.target)
            witness = _connection_covariance_witness(
                chart, phi,
                bv_connection(DeltaOperator.from_section(omega)),
                bv_connection(pull_delta_table(phi, omega)))
            if witness is not None:
                ok, detail = False, "BV connection covariance"
            gamma_src = gen.christoffel(chart)
            gamma_tgt = transform_christoffel(phi, gamma_src)
            witness = _connection_covariance_witness(
                chart, phi, ber_from_tangent(gamma_tgt), ber_from_tangent(gamma_src))
            if witness is not None:
                ok, detail = False, "tangent connection covariance"
    _report("connections: flatness, parallel-section equation, round trip with "
            "constant ambiguity, covariance of both constructions", ok, start, detail)


def test_transport_suite():
    start = time.perf_counter()
    gen = SampleGen(127)
    ok = True
    odd_paths = 0
    for chart in (SIG11, SIG21):
        for index in range(5):
            gamma = gen.christoffel(chart)
            with_odd = index % 2 == 0
            path = gen.formal_path(chart, with_odd_direction=with_odd)
            if with_odd and not all(c.is_zero() for c in path.components[chart.sig.n:]):
                odd_paths += 1
            report = check_sdet_transport(gamma, path, order=4)
            if report["status"] != "pass":
                ok = False
    _report("transport: Berezinian transport equals inverse sdet of frame transport "
            "to order 4, including odd-parameter paths", ok and odd_paths > 0, start)


def test_cy_consistency_suite():
    start = time.perf_counter()
    gen = SampleGen(131)
    ok = True
    for chart in (SIG11, SIG21):
        for _ in range(5):
            h, gamma, _ = gen.cy_scenario(chart)
            report = check_cy_consistency(h, gamma)
            if report["status"] != "pass":
                ok = False
    _report("calabi-yau consistency: supertrace-constrained data makes both "
            "Berezinian connections agree, 10 scenarios", ok, start)


def test_manin_comparison_suite():
    start = time.perf_counter()
    gen = SampleGen(137)
    ok = True
    detail = ""
    count = 0
    for chart in ALL_CHARTS:
        for _ in range(9):
            alpha, *_ = gen.homogeneous_mvform(chart)
            sigma = eta(gen.trivialising_section(chart), alpha)
            count += 1
            if not manin_gamma_inverse(manin_gamma(sigma)).agrees_with(sigma):
                ok, detail = False, "bijectivity"
            lhs = manin_delta(manin_gamma(sigma))
            rhs = -manin_gamma(partial_int(sigma))
            if not lhs.agrees_with(rhs):
                ok, detail = False, "anticommutation"
    assert count >= 25
    _report("parity-flip comparison: anticommutation with the divergence and "
            "bijective round trip, 27 integral forms", ok, start, detail)


def test_schouten_suite():
    start = time.perf_counter()
    from superbv.charts import vector_apply

    gen = SampleGen(139)
    ok = True
    detail = ""
    for chart in ALL_CHARTS:
        for _ in range(25):
            alpha, p, q, pa = gen.homogeneous_mvform(chart)
            beta, r, s, pb = gen.homogeneous_mvform(chart)
            rhs = schouten(beta, alpha)
            if ((p + q + 1) * (r + s + 1) + pa * pb) % 2 == 0:
                rhs = -rhs
            if not schouten(alpha, beta).agrees_with(rhs):
                ok, detail = False, "symmetry"
        for _ in range(25):
            alpha, p, q, pa = gen.homogeneous_mvform(chart, max_p=2, max_q=1)
            beta, r, s, pb = gen.homogeneous_mvform(chart, max_p=1, max_q=1)
            gamma, *_ = gen.homogeneous_mvform(chart, max_p=1, max_q=1)
            lhs = schouten(alpha, wedge(beta, gamma))
            second = wedge(beta, schouten(alpha, gamma))
            if ((p + q + 1) * (r + s) + pa * pb) % 2:
                second = -second
            if not lhs.agrees_with(wedge(schouten(alpha, beta), gamma) + second):
                ok, detail = False, "derivation"
        for _ in range(25):
            v = gen.mvform(chart, 1, 0, parity=gen.rng.randint(0, 1))
            w = gen.mvform(chart, 1, 0, parity=gen.rng.randint(0, 1))
            if v.is_zero() or w.is_zero():
                continue
            f = gen.jet(chart.sig)
            col = lambda form: [form.terms.get(((), (k,)), chart.zero())
                                for k in range(chart.dim)]
            lhs = vector_apply(chart, col(schouten(v, w)), f)
            second = vector_apply(chart, col(w), vector_apply(chart, col(v), f))
            if (v.parity() * w.parity()) % 2:
                second = -second
            rhs = vector_apply(chart, col(v), vector_apply(chart, col(w), f)) - second
            if not lhs.agrees_with(rhs):
                ok, detail = False, "vector bracket"
    for chart in (SIG11, SIG21):
        for _ in range(13):
            phi = gen.invertible_morphism(chart)
            a, *_ = gen.homogeneous_mvform(phi.target, max_p=2, max_q=1)
            b, *_ = gen.homogeneous_mvform(phi.target, max_p=1, max_q=1)
            lhs = pull_mvform(phi, schouten(a, b))
            if not lhs.agrees_with(schouten(pull_mvform(phi, a), pull_mvform(phi, b))):
                ok, detail = False, "equivariance"
    _report("schouten bracket: symmetry, derivation, vector-field extension, "
            "coordinate equivariance, 25 samples each", ok, start, detail)


def test_projection_suite():
    start = time.perf_counter()
    gen = SampleGen(149)
    ok = True
    detail = ""
    for chart in (SIG11, SIG22):
        omega = gen.trivialising_section(chart)
        delta = DeltaOperator.from_section(omega)
        alpha0 = MultiVectorForm(chart, {((0, 1), ()): chart.coordinate(0)})

        def perturbed(x):
            return extend_delta(delta, x) + schouten(alpha0, x)

        projected = project_strong(perturbed, chart)
        for got, want in zip(projected.delta.values, delta.values):
            if not got.agrees_with(want):
                ok, detail = False, "table recovery"
        for _ in range(10):
            x, *_ = gen.homogeneous_mvform(chart, max_p=2, max_q=1)
            once = extend_delta(projected.delta, x)
            if not extend_delta(projected.delta, once).is_zero():
                ok, detail = False, "squared projection"
            if not once.agrees_with(projected_apply(perturbed, x)):
                ok, detail = False, "graded projection"
    _report("projection: the degree-lowering part of a perturbed compatible "
            "operator is strongly compatible and squares to zero", ok, start, detail)


def test_tooling_round_trip_and_determinism():
    start = time.perf_counter()
    sc = parse("ring 2|2 cap 4;\n")
    gen = SampleGen(151)
    chart = sc.chart
    checked = 0
    ok = True
    for _ in range(150):
        f = gen.jet(chart.sig, max_terms=4)
        back = parse_expression(sc, render_value(f))
        if isinstance(back, GaussianRational):
            back = JetSuperFunction.scalar(chart.sig, back)
        if not back.agrees_with(f):
            ok = False
        checked += 1
    for _ in range(90):
        alpha, *_ = gen.homogeneous_mvform(chart, max_p=2, max_q=2, allow_repeats=True)
        if alpha.is_zero():
            continue
        back = parse_expression(sc, render_value(alpha))
        if isinstance(back, GaussianRational):
            back = JetSuperFunction.scalar(chart.sig, back)
        if isinstance(back, JetSuperFunction):
            back = MultiVectorForm.from_function(chart, back)
        if not back.agrees_with(alpha):
            ok = False
        checked += 1
    if checked < 200:
        ok = False

    suites = ["schouten_symmetry", "manin_comparison", "delta_projection"]
    hashes = []
    for _ in range(2):
        results = run_suites(SIG11, suites, seed=8, trials=5)
        report = build_report(None, 8, 5, suites, results)
        if report["summary"]["failed"] or report["summary"]["errors"]:
            ok = False
        hashes.append(report["determinism_hash"])
    if hashes[0] != hashes[1]:
        ok = False
    _report(f"tooling: parser round trip on {checked} values, report determinism "
            "hash stable across two runs", ok, start)
