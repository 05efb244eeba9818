import random

import pytest

from mgonal.errors import ResourceLimitError
from mgonal.forms import Domain, MgonalForm
from mgonal.local import (
    LocalReason,
    e_max_level,
    local_exceptions,
    locally_represented,
    mgonal_represents_zp,
    quad_diag_represents_zp,
    relevant_primes,
)
from mgonal.represent import represents

from oracles import (
    congruence_solvable_quad,
    mgonal_congruence_depth,
    mgonal_congruence_solvable,
    subset_sum_reachable_mod,
)


class TestQuadKernel:
    def test_two_squares_miss_three_dyadically(self):
        assert quad_diag_represents_zp((1, 1), 3, 2) == (False, None)

    def test_rank_three_odd_primes_universal(self):
        for t in range(0, 501, 7):
            for p in (3, 5, 7, 11, 13):
                ok, _ = quad_diag_represents_zp((1, 1, 1), t, p)
                assert ok, (t, p)

    def test_single_square_four(self):
        ok, cert = quad_diag_represents_zp((1,), 4, 2)
        assert ok and cert is not None

    def test_zero_target(self):
        assert quad_diag_represents_zp((2, 3), 0, 5) == (True, (0, 0))

    def test_certificate_solves_congruence(self):
        rng = random.Random(2)
        for _ in range(200):
            coeffs = tuple(sorted(rng.randint(1, 6) for _ in range(rng.randint(1, 4))))
            t = rng.randint(1, 200)
            p = rng.choice([2, 3, 5])
            ok, cert = quad_diag_represents_zp(coeffs, t, p)
            if ok and cert is not None:
                val = sum(a * x * x for a, x in zip(coeffs, cert)) - t
                assert val % p == 0

    def test_oracle_equivalence_sampled(self):
        rng = random.Random(9)
        for _ in range(250):
            coeffs = tuple(sorted(rng.randint(1, 6) for _ in range(rng.randint(1, 4))))
            t = rng.randint(1, 200)
            p = rng.choice([2, 3, 5])
            want = congruence_solvable_quad(coeffs, t, p, e_max_level(coeffs, t, p))
            got, _ = quad_diag_represents_zp(coeffs, t, p)
            assert got == want, (coeffs, t, p)

    def test_oracle_equivalence_larger_primes(self):
        rng = random.Random(123)
        for _ in range(300):
            coeffs = tuple(sorted(rng.randint(1, 14) for _ in range(rng.randint(1, 4))))
            t = rng.randint(1, 400)
            p = rng.choice([7, 11, 13])
            want = congruence_solvable_quad(coeffs, t, p, e_max_level(coeffs, t, p))
            got, _ = quad_diag_represents_zp(coeffs, t, p)
            assert got == want, (coeffs, t, p)

    def test_stabilization_between_witness_and_e_max(self):
        # once solvable with a liftable class, mod-p^e solvability holds at
        # every deeper level up to e_max; once false, it fails at e_max
        cases = [((1, 1), 3, 2), ((1, 1), 112, 2), ((1, 2, 3), 35, 3), ((1, 1, 1, 4), 128, 2)]
        for coeffs, t, p in cases:
            e_max = e_max_level(coeffs, t, p)
            got, _ = quad_diag_represents_zp(coeffs, t, p)
            answers = [congruence_solvable_quad(coeffs, t, p, e) for e in range(1, e_max + 1)]
            # monotone nonincreasing and ends at the kernel verdict
            assert all(a >= b for a, b in zip(answers, answers[1:]))
            assert answers[-1] == got

    def test_budget_error_on_huge_prime_with_mixed_factor(self):
        # grid 2053^2 exceeds the class budget and the unit fast path does not
        # apply because one coefficient is divisible by p
        with pytest.raises(ResourceLimitError):
            quad_diag_represents_zp((1, 2053), 2053, 2053)

    def test_huge_prime_unit_fast_path(self):
        # all-unit coefficients at a grid-busting prime take the closed-form path
        ok, _ = quad_diag_represents_zp((1, 1), 2053, 2053)
        assert ok  # 2053 = 1 mod 4, so x^2 + y^2 is isotropic at 2053
        ok, _ = quad_diag_represents_zp((1, 1), 2063, 2063)
        assert not ok  # 2063 = 3 mod 4: anisotropic, odd valuation unreachable
        ok, _ = quad_diag_represents_zp((1, 1), 2063 * 2063 * 5, 2063)
        assert ok  # even valuation, unit part hit mod p


class TestPropositionCases:
    def test_case1_odd_prime_dividing_m_minus_2(self):
        f = MgonalForm.make(5, [1, 2, 3])
        for n in range(0, 101):
            v = mgonal_represents_zp(f, n, 3)
            assert v.represented and v.reason is LocalReason.UNIVERSAL_CASE_1

    def test_case2_m_not_divisible_by_4(self):
        f = MgonalForm.make(5, [1, 2, 3])
        for n in range(0, 101):
            v = mgonal_represents_zp(f, n, 2)
            assert v.represented and v.reason is LocalReason.UNIVERSAL_CASE_2

    def test_case4_two_squares_at_m4(self):
        v = mgonal_represents_zp(MgonalForm.make(4, [1, 1]), 3, 2)
        assert not v.represented and v.reason is LocalReason.QUAD_REDUCTION_2

    def test_case3_reason(self):
        v = mgonal_represents_zp(MgonalForm.make(5, [1, 1]), 1, 7)
        assert v.reason is LocalReason.QUAD_REDUCTION_ODD

    def test_conformance_random_all_cases(self):
        rng = random.Random(41)
        seen = set()
        for _ in range(120):
            m = rng.randint(3, 14)
            f = MgonalForm.make(m, [rng.randint(1, 6) for _ in range(rng.randint(1, 4))])
            n = rng.randint(0, 300)
            p = rng.choice([2, 2, 3, 3, 5, 7])
            v = mgonal_represents_zp(f, n, p)
            seen.add(v.reason)
            depth = mgonal_congruence_depth(f, n, p)
            assert v.represented == mgonal_congruence_solvable(f, n, p, depth), (f, n, p)
        assert seen == set(LocalReason)

    def test_gcd_normalization(self):
        # <2,2>_4 at odd targets fails at p = 2 through the divisibility step
        f = MgonalForm.make(4, [2, 2])
        assert not mgonal_represents_zp(f, 5, 2).represented
        assert mgonal_represents_zp(f, 5, 3).represented  # 2 is a 3-adic unit
        assert mgonal_represents_zp(f, 8, 2).represented  # 8 = 2*(1+3... ) via x=(1,1), P=1


def test_relevant_primes_examples():
    assert relevant_primes(MgonalForm.make(5, [1, 1, 1])) == [2, 3]
    assert relevant_primes(MgonalForm.make(7, [1, 2, 6])) == [2, 3, 5]
    assert relevant_primes(MgonalForm.make(4, [1])) == [2]


class TestLocallyRepresented:
    def test_three_triangulars_locally_universal(self):
        f = MgonalForm.make(3, [1, 1, 1])
        assert all(locally_represented(f, n).overall for n in range(0, 1001))

    def test_two_squares_miss_three(self):
        assert not locally_represented(MgonalForm.make(4, [1, 1]), 3).overall

    def test_zero_always_represented(self):
        for m in (3, 4, 7, 12):
            assert locally_represented(MgonalForm.make(m, [1]), 0).overall

    def test_profile_overall_is_conjunction(self):
        prof = locally_represented(MgonalForm.make(4, [1, 1]), 3)
        assert prof.overall == all(v.represented for v in prof.verdicts.values())
        d = prof.to_json_dict()
        assert d["N"] == 3 and d["overall"] is False
        assert {v["p"] for v in d["verdicts"]} >= {2}

    def test_rank_one_square_discriminant_obstruction(self):
        # 24*3 + 1 = 73 is a quadratic nonresidue mod 7: N=3 is locally missed
        # by the bare pentagonal number even though 7 is not a fixed obstruction
        f = MgonalForm.make(5, [1])
        assert not locally_represented(f, 3).overall
        assert locally_represented(f, 12).overall

    def test_rank_one_odd_valuation_obstruction_at_large_prime(self):
        # 2*P_18(x) = 114 transfers to x^2 = 7492 = 4*1873: the odd valuation
        # at 1873 blocks it, visible in the congruence only mod 1873^2
        f = MgonalForm.make(18, [2])
        prof = locally_represented(f, 114)
        assert not prof.overall
        assert not prof.verdicts[1873].represented
        assert mgonal_congruence_solvable(f, 114, 1873, 1)
        assert not mgonal_congruence_solvable(f, 114, 1873, 2)

    def test_global_implies_local(self):
        rng = random.Random(6)
        for _ in range(25):
            m = rng.randint(3, 12)
            f = MgonalForm.make(m, [rng.randint(1, 6) for _ in range(rng.randint(1, 5))])
            for n in rng.sample(range(0, 2000), 12):
                if represents(f, n, Domain.NONNEG) is not None:
                    assert locally_represented(f, n).overall, (f, n)

    def test_congruence_semantics_crt_spot_check(self):
        # locally represented iff the congruence is solvable mod every prime
        # power (hence every modulus, by CRT) up to the sampled cap
        cap = 512
        prime_powers = []
        for p in (2, 3, 5, 7, 11, 13, 17, 19, 23):
            q = p
            while q <= cap:
                prime_powers.append(q)
                q *= p
        prime_powers += [p for p in range(29, cap, 2) if all(p % q for q in range(2, int(p**0.5) + 1))]
        cases = [
            (MgonalForm.make(4, [1, 1]), 3),
            (MgonalForm.make(4, [1, 1]), 5),
            (MgonalForm.make(6, [1, 2, 2]), 11),
            (MgonalForm.make(5, [1]), 3),
            (MgonalForm.make(7, [1, 1, 3]), 47),
        ]
        for f, n in cases:
            local = locally_represented(f, n).overall
            congruences = all(subset_sum_reachable_mod(f, n, r) for r in prime_powers)
            assert local == congruences, (f.label(), n)

    def test_locally_universal_quad_coefficients_transfer(self):
        # five squares are locally universal, so the matching m-gonal forms
        # are locally universal for every m
        rng = random.Random(8)
        for coeffs in [(1, 1, 1, 1, 1), (1, 1, 2, 4, 8)]:
            for m in (3, 5, 8, 12, 17, 23, 30):
                f = MgonalForm.make(m, coeffs)
                for n in rng.sample(range(1, 1001), 8):
                    assert locally_represented(f, n).overall, (m, coeffs, n)


class TestLocalExceptions:
    def test_rank5_all_ones_pentagonal_clean(self):
        assert local_exceptions(MgonalForm.make(5, [1, 1, 1, 1, 1]), 1000) == []

    def test_two_squares_exceptions(self):
        got = local_exceptions(MgonalForm.make(4, [1, 1]), 10)
        assert {3, 6, 7} <= set(got)

    def test_gcd_parity(self):
        got = local_exceptions(MgonalForm.make(4, [2, 2]), 5)
        assert {1, 3, 5} <= set(got)
