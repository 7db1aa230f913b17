import pytest

from airlog import (
    Card,
    GroundRule,
    IncrementalProgram,
    atom,
    compile_volatile,
    enumerate_stable,
    is_stable,
    solve,
)
from airlog.errors import StepOrderError, UnsupportedProgramError

a, b = atom("a"), atom("b")


def explained_step(t, with_fact=True):
    rules = [GroundRule(atom("explained", t), (atom("airSmellNormal", t),))]
    if with_fact:
        rules.append(GroundRule(atom("airSmellNormal", t)))
    return rules


class TestSolveBasics:
    def test_sat_horizon(self):
        p = IncrementalProgram()
        p.add_base([GroundRule(atom("state", "cold"))])
        p.add_step(1, explained_step(1))
        p.set_volatile(1, compile_volatile(1))
        answer = solve(p)
        assert atom("airSmellNormal", 1) in answer.atoms
        assert atom("explained", 1) in answer.atoms
        assert atom("state", "cold") in answer.atoms

    def test_unsat_when_unexplained(self):
        p = IncrementalProgram()
        p.add_step(1, explained_step(1, with_fact=False))
        p.set_volatile(1, compile_volatile(1))
        assert solve(p) is None

    def test_answer_is_stable_against_program(self):
        p = IncrementalProgram()
        p.add_base([GroundRule(atom("state", "cold"))])
        p.add_step(1, explained_step(1))
        p.set_volatile(1, compile_volatile(1))
        answer = solve(p)
        assert is_stable(p.all_rules(), answer.atoms)

    def test_base_only_stratified_program(self):
        p = IncrementalProgram()
        p.add_base([GroundRule(a), GroundRule(b, (a,))])
        assert solve(p).atoms == {a, b}

    def test_non_stratified_rejected(self):
        p = IncrementalProgram()
        p.add_base([GroundRule(a, neg=(b,)), GroundRule(b, neg=(a,))])
        with pytest.raises(UnsupportedProgramError):
            solve(p)

    def test_positive_loop_is_fine(self):
        p = IncrementalProgram()
        p.add_base([GroundRule(a, (b,)), GroundRule(b, (a,))])
        assert solve(p).atoms == set()


class TestIncrementality:
    def test_add_step_order_violation(self):
        p = IncrementalProgram()
        p.add_step(5, explained_step(5))
        with pytest.raises(StepOrderError):
            p.add_step(4, explained_step(4))

    def test_volatile_replaced_not_accumulated(self):
        p = IncrementalProgram()
        p.add_step(5, explained_step(5))
        p.set_volatile(5, compile_volatile(5))
        p.add_step(6, explained_step(6, with_fact=False))
        p.set_volatile(6, compile_volatile(6))
        # only the t=6 constraint is active, so the program is now UNSAT
        assert p.volatile == (6, compile_volatile(6))
        assert solve(p) is None
        # and replacing it again at a satisfiable horizon recovers
        p.add_step(7, explained_step(7))
        p.set_volatile(7, compile_volatile(7))
        assert solve(p) is not None

    def test_unsat_horizon_keeps_state_reusable(self):
        p = IncrementalProgram()
        p.add_step(1, explained_step(1))
        p.set_volatile(1, compile_volatile(1))
        assert solve(p) is not None
        p.add_step(2, explained_step(2, with_fact=False))
        p.set_volatile(2, compile_volatile(2))
        assert solve(p) is None
        p.add_step(3, explained_step(3))
        p.set_volatile(3, compile_volatile(3))
        answer = solve(p)
        assert answer is not None
        assert atom("airSmellNormal", 1) in answer.atoms

    def test_head_must_carry_batch_step(self):
        p = IncrementalProgram()
        p.add_step(1, [GroundRule(atom("p", 7))])
        with pytest.raises(UnsupportedProgramError):
            solve(p)

    def test_body_beyond_batch_step_rejected(self):
        p = IncrementalProgram()
        p.add_step(1, [GroundRule(atom("p", 1), (atom("q", 3),))])
        with pytest.raises(UnsupportedProgramError):
            solve(p)

    def test_same_step_negation_cycle_rejected(self):
        p = IncrementalProgram()
        p.add_step(1, [
            GroundRule(atom("p", 1), neg=(atom("q", 1),)),
            GroundRule(atom("q", 1), neg=(atom("p", 1),)),
        ])
        with pytest.raises(UnsupportedProgramError):
            solve(p)


def _hand_step(t):
    """Small stratified per-step batch exercising negation, chaining, cards."""
    rules = []
    if t % 3 == 0 or t == 1:
        rules.append(GroundRule(atom("obs", t)))
    rules.append(GroundRule(atom("ev", t), (atom("obs", t),), (atom("evEnd", t),)))
    if t > 1:
        rules.append(GroundRule(atom("evEnd", t), (atom("ev", t - 1), atom("obs", t))))
        rules.append(GroundRule(atom("ev", t), (atom("ev", t - 1),), (atom("evEnd", t),)))
    rules.append(GroundRule(atom("seen", t), (), (), Card("ev", t - 5, t)))
    return rules


class TestIncrementalVsMonolithic:
    def test_two_thousand_cycles_match_single_shot(self):
        horizon = 2000
        incremental = IncrementalProgram()
        last = None
        for t in range(1, horizon + 1):
            incremental.add_step(t, _hand_step(t))
            incremental.set_volatile(t, GroundRule(None, neg=(atom("seen", t),)))
            last = solve(incremental)
        monolithic = IncrementalProgram()
        for t in range(1, horizon + 1):
            monolithic.add_step(t, _hand_step(t))
        monolithic.set_volatile(horizon, GroundRule(None, neg=(atom("seen", horizon),)))
        assert last is not None
        assert solve(monolithic).atoms == last.atoms

    def test_prefix_agrees_with_oracle(self):
        p = IncrementalProgram()
        rules = []
        for t in range(1, 7):
            batch = _hand_step(t)
            rules += batch
            p.add_step(t, batch)
        answer = solve(p)
        models = enumerate_stable(rules)
        assert models == {answer.atoms}


def _random_step_batch(rng, t, n_tiers=5):
    """Stratified-by-construction step batch: tier-k heads may negate only
    lower tiers at the same step; positive references and interval elements
    may reach anywhere at or below t."""
    import random as _random

    rules = []
    for tier in range(n_tiers):
        head = atom(f"p{tier}", t)
        if rng.random() < 0.3:
            rules.append(GroundRule(head))
            continue
        for _ in range(rng.randint(0, 2)):
            pos, neg, card = [], [], None
            for _ in range(rng.randint(0, 2)):
                ref_tier = rng.randrange(n_tiers)
                ref_step = t if ref_tier < tier and rng.random() < 0.5 else rng.randint(max(1, t - 3), max(1, t - 1))
                if ref_step == t and ref_tier < tier and rng.random() < 0.5:
                    neg.append(atom(f"p{ref_tier}", t))
                else:
                    pos.append(atom(f"p{ref_tier}", ref_step))
            if rng.random() < 0.4:
                lo = t - rng.randint(0, 6)
                hi = t - rng.randint(0, 2)
                if lo > hi:
                    lo, hi = hi, lo
                card = Card(f"p{rng.randrange(n_tiers)}", lo, hi)
            if not pos and not neg and card is None:
                continue
            rules.append(GroundRule(head, tuple(pos), tuple(neg), card))
    return rules


class TestRandomStepScenarios:
    def test_per_step_evaluation_matches_oracle(self):
        import random

        for seed in range(12):
            rng = random.Random(seed)
            program = IncrementalProgram()
            all_rules = []
            for t in range(1, 9):
                batch = _random_step_batch(rng, t)
                program.add_step(t, batch)
                all_rules += batch
            answer = solve(program)
            models = enumerate_stable(all_rules, max_atoms=20)
            assert models == {answer.atoms}, f"seed {seed}"
