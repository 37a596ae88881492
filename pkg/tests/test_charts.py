import pytest

from superbv.charts import (
    BerSection,
    Chart,
    ChartError,
    Morphism,
    differential_of_function,
    pair,
    pull_ber,
    pull_covector,
    pull_vector,
    vector_apply,
)
from superbv.jetring import GaussianRational, RingSignature
from superbv.samples import SampleGen
from superbv.supermatrix import SuperMatrix

SIG11 = RingSignature(n=1, m=1, cap=4)
SIG21 = RingSignature(n=2, m=1, cap=4)
SIG22 = RingSignature(n=2, m=2, cap=4)
CHARTS = [Chart(SIG11), Chart(SIG21), Chart(SIG22)]


def basis_column(chart, k):
    return [chart.one() if i == k else chart.zero() for i in range(chart.dim)]


def column_agrees(a, b):
    return all(x.agrees_with(y) for x, y in zip(a, b))


class TestDifferential:
    def test_identity(self):
        for chart in CHARTS:
            d = Morphism.identity(chart).differential()
            assert d.agrees_with(SuperMatrix.identity(chart.sig, chart.sig.n, chart.sig.m))

    def test_linear_parity_diagonal_map(self):
        chart = Chart(SIG22)
        sig = SIG22
        a = GaussianRational.of(2)
        pullbacks = [chart.coordinate(0).scale(a), chart.coordinate(1),
                     chart.coordinate(2), chart.coordinate(3).scale(a)]
        d = Morphism(chart, Chart(sig, name="zeta"), pullbacks).differential()
        expected = SuperMatrix.identity(sig, 2, 2)
        rows = [row[:] for row in expected.rows]
        rows[0][0] = rows[0][0].scale(a)
        rows[3][3] = rows[3][3].scale(a)
        assert d.agrees_with(SuperMatrix(sig, 2, 2, rows))

    def test_explicit_1_1_example(self):
        chart = Chart(SIG11)
        z = chart.coordinate(0)
        th = chart.coordinate(1)
        phi = Morphism(chart, Chart(SIG11, name="zeta"), [z, (chart.one() + z) * th])
        d = phi.differential()
        assert d.rows[0][0].agrees_with(chart.one())
        assert d.rows[0][1].is_zero()
        # (-1)^((|z|+|th|)|th|) d((1+z)th)/dz = -th
        assert d.rows[1][0].agrees_with(-th)
        assert d.rows[1][1].agrees_with(chart.one() + z)

    def test_hessian_symmetry(self):
        # d_j dphi^m_n = (-1)^(|n||j| + |n||m| + |j||m|) d_n dphi^m_j
        gen = SampleGen(101)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            d = phi.differential()
            for mrow in range(chart.dim):
                pm = chart.parity(mrow)
                for nn in range(chart.dim):
                    for j in range(chart.dim):
                        pn, pj = chart.parity(nn), chart.parity(j)
                        lhs = chart.d(d.rows[mrow][nn], j)
                        rhs = chart.d(d.rows[mrow][j], nn)
                        if (pn * pj + pn * pm + pj * pm) % 2:
                            rhs = -rhs
                        assert lhs.agrees_with(rhs)


class TestApplyAndCompose:
    def test_apply_is_ring_map(self):
        gen = SampleGen(5)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            target = phi.target
            f = gen.jet(target.sig)
            g = gen.jet(target.sig)
            assert phi.apply(f * g).agrees_with(phi.apply(f) * phi.apply(g))
            assert phi.apply(f + g).agrees_with(phi.apply(f) + phi.apply(g))

    def test_apply_respects_conjugation(self):
        gen = SampleGen(17)
        chart = Chart(SIG21)
        phi = gen.invertible_morphism(chart)
        f = gen.jet(phi.target.sig)
        assert phi.apply(f.conjugate()).agrees_with(phi.apply(f).conjugate())

    def test_compose_identity(self):
        gen = SampleGen(3)
        chart = Chart(SIG11)
        phi = gen.invertible_morphism(chart)
        ident_src = Morphism.identity(chart)
        assert all(a.agrees_with(b) for a, b in
                   zip(phi.compose(ident_src).pullbacks, phi.pullbacks))

    def test_linear_maps_compose_as_matrices(self):
        chart = Chart(SIG11)
        z, th = chart.coordinate(0), chart.coordinate(1)
        two = GaussianRational.of(2)
        three = GaussianRational.of(3)
        phi = Morphism(chart, Chart(SIG11, name="zeta"), [z.scale(two), th])
        psi = Morphism(Chart(SIG11, name="zeta"), Chart(SIG11, name="pi"), [
            Chart(SIG11, name="zeta").coordinate(0).scale(three),
            Chart(SIG11, name="zeta").coordinate(1),
        ])
        comp = psi.compose(phi)
        assert comp.pullbacks[0].agrees_with(z.scale(two * three))

    def test_chain_rule(self):
        # d(psi o phi)^l_k = phi#(dpsi^l_i) dphi^i_k, entries multiplied in order
        gen = SampleGen(29)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            psi = gen.invertible_morphism(phi.target)
            comp = psi.compose(phi)
            lhs = comp.differential()
            dpsi = psi.differential()
            dphi = phi.differential()
            pulled = SuperMatrix(chart.sig, chart.sig.n, chart.sig.m,
                                 [[phi.apply(e) for e in row] for row in dpsi.rows])
            assert lhs.agrees_with(pulled * dphi)


class TestInvertMorphism:
    def test_identity(self):
        chart = Chart(SIG11)
        inv = Morphism.identity(chart).invert()
        assert all(a.agrees_with(b) for a, b in
                   zip(inv.pullbacks, Morphism.identity(chart).pullbacks))

    def test_linear_scalar(self):
        sig = RingSignature(n=1, m=0, cap=4)
        chart = Chart(sig)
        z = chart.coordinate(0)
        phi = Morphism(chart, Chart(sig, name="zeta"), [z.scale(GaussianRational.of(2))])
        inv = phi.invert()
        half = GaussianRational.of(1) / GaussianRational.of(2)
        assert inv.pullbacks[0].agrees_with(Chart(sig, name="zeta").coordinate(0).scale(half))

    def test_formal_inverse_round_trip(self):
        gen = SampleGen(41)
        for chart in CHARTS:
            for _ in range(3):
                phi = gen.invertible_morphism(chart)
                psi = phi.invert()
                comp = psi.compose(phi)
                for k in range(chart.dim):
                    assert comp.pullbacks[k].agrees_with(chart.coordinate(k))
                comp2 = phi.compose(psi)
                for k in range(chart.dim):
                    assert comp2.pullbacks[k].agrees_with(phi.target.coordinate(k))

    def test_differential_inverse_identity(self):
        # (dphi^-1)^l_m = phi#(d(phi^-1)^l_m)
        gen = SampleGen(59)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            lhs = phi.differential().inverse()
            dpsi = phi.invert().differential()
            rhs_rows = [[phi.apply(phi_inv_entry) for phi_inv_entry in row] for row in dpsi.rows]
            rhs = SuperMatrix(chart.sig, chart.sig.n, chart.sig.m, rhs_rows)
            assert lhs.agrees_with(rhs)

    def test_rejects_noninvertible_linear_part(self):
        chart = Chart(SIG11)
        z = chart.coordinate(0)
        with pytest.raises(ChartError):
            Morphism(chart, Chart(SIG11, name="zeta"), [z * z, chart.coordinate(1)]).invert()


class TestVectorCalculus:
    def test_vector_action_matches_operator_pullback(self):
        # (phi* d/dxi^k)(g) = phi#( d/dxi^k ( (phi^-1)# g ) )
        gen = SampleGen(71)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            psi = phi.invert()
            g = gen.jet(chart.sig)
            for k in range(chart.dim):
                pulled = pull_vector(phi, basis_column(phi.target, k))
                lhs = vector_apply(chart, pulled, g)
                rhs = phi.apply(phi.target.d(psi.apply(g), k))
                assert lhs.agrees_with(rhs)

    def test_pull_vector_identity(self):
        chart = Chart(SIG21)
        ident = Morphism.identity(chart)
        gen = SampleGen(1)
        col = [gen.jet(chart.sig) for _ in range(chart.dim)]
        assert column_agrees(pull_vector(ident, col), col)

    def test_pull_vector_functorial(self):
        gen = SampleGen(83)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            psi = gen.invertible_morphism(phi.target)
            col = [gen.jet(psi.target.sig) for _ in range(chart.dim)]
            via_composite = pull_vector(psi.compose(phi), col)
            stepwise = pull_vector(phi, pull_vector(psi, col))
            assert column_agrees(via_composite, stepwise)

    def test_pairing_duality(self):
        # (phi* dxi^j)(phi* d/dxi^k) = (-1)^|j| delta^j_k
        gen = SampleGen(97)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            for j in range(chart.dim):
                row = pull_covector(phi, basis_column(phi.target, j))
                for k in range(chart.dim):
                    col = pull_vector(phi, basis_column(phi.target, k))
                    value = pair(chart, row, col)
                    if j != k:
                        assert value.is_zero()
                    else:
                        unit = chart.one() if chart.parity(j) == 0 else -chart.one()
                        assert value.agrees_with(unit)

    def test_pull_df_is_d_of_pullback(self):
        gen = SampleGen(103)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            f = gen.jet(phi.target.sig, holomorphic=True)
            lhs = pull_covector(phi, differential_of_function(phi.target, f))
            rhs = differential_of_function(chart, phi.apply(f))
            assert column_agrees(lhs, rhs)

    def test_pairing_invariant_under_pullback(self):
        # (phi* xi)(phi* X) = phi#(xi(X))
        gen = SampleGen(107)
        for chart in CHARTS:
            phi = gen.invertible_morphism(chart)
            row = [gen.jet(phi.target.sig) for _ in range(chart.dim)]
            col = [gen.jet(phi.target.sig) for _ in range(chart.dim)]
            lhs = pair(chart, pull_covector(phi, row), pull_vector(phi, col))
            rhs = phi.apply(pair(phi.target, row, col))
            assert lhs.agrees_with(rhs)


class TestJacobi:
    def test_jacobi_formula(self):
        # X(sdet dphi) = sum (-1)^(|m| + |X|(|m|+|n|)) sdet dphi (dphi^-1)^m_n X(dphi^n_m)
        gen = SampleGen(113)
        for chart in CHARTS:
            for _ in range(3):
                phi = gen.invertible_morphism(chart)
                d = phi.differential()
                sdet = d.sdet()
                d_inv = d.inverse()
                for k in range(chart.dim):
                    px = chart.parity(k)
                    lhs = chart.d(sdet, k)
                    rhs = chart.zero()
                    for mrow in range(chart.dim):
                        for nrow in range(chart.dim):
                            pm, pn = chart.parity(mrow), chart.parity(nrow)
                            term = sdet * d_inv.rows[mrow][nrow] * chart.d(d.rows[nrow][mrow], k)
                            if (pm + px * (pm + pn)) % 2:
                                term = -term
                            rhs = rhs + term
                    assert lhs.agrees_with(rhs)

    def test_jacobi_sum(self):
        # sum_j d_j(sdet dphi (dphi^-1)^j_k) = 0
        gen = SampleGen(127)
        for chart in CHARTS:
            for _ in range(3):
                phi = gen.invertible_morphism(chart)
                d = phi.differential()
                sdet = d.sdet()
                d_inv = d.inverse()
                for k in range(chart.dim):
                    acc = chart.zero()
                    for j in range(chart.dim):
                        acc = acc + chart.d(sdet * d_inv.rows[j][k], j)
                    assert acc.is_zero()


class TestBerPullback:
    def test_identity(self):
        chart = Chart(SIG11)
        gen = SampleGen(2)
        omega = gen.trivialising_section(chart)
        pulled = pull_ber(Morphism.identity(chart), omega)
        assert pulled.coefficient.agrees_with(omega.coefficient)

    def test_linear_diagonal(self):
        chart = Chart(SIG11)
        z, th = chart.coordinate(0), chart.coordinate(1)
        a = GaussianRational.of(2)
        d = GaussianRational.of(3)
        phi = Morphism(chart, Chart(SIG11, name="zeta"), [z.scale(a), th.scale(d)])
        omega = BerSection(phi.target, phi.target.one())
        pulled = pull_ber(phi, omega)
        assert pulled.coefficient.agrees_with(chart.one().scale(a / d))

    def test_functorial(self):
        gen = SampleGen(131)
        chart = Chart(SIG11)
        phi = gen.invertible_morphism(chart)
        psi = gen.invertible_morphism(phi.target)
        omega = gen.trivialising_section(psi.target)
        once = pull_ber(psi.compose(phi), omega)
        twice = pull_ber(phi, pull_ber(psi, omega))
        assert once.coefficient.agrees_with(twice.coefficient)
