import random

import pytest

from hyperfind import logic
from hyperfind.logic import (
    And, BoolLit, Cmp, EvalError, IntLit, Not, Quant, Var,
    eval_formula, eval_term, free_vars, substitute,
)

from conftest import all_assignments, random_formula, random_term


def test_eval_term_literal_arithmetic():
    assert eval_term(logic.add(Var("x"), IntLit(1)), {"x": 2}) == 3
    assert eval_term(logic.mul(IntLit(2), Var("x")), {"x": 3}) == 6


def test_eval_term_unbound_variable_names_it():
    with pytest.raises(EvalError, match="'x'"):
        eval_term(Var("x"), {"y": 0})


def test_eval_formula_basics():
    assert eval_formula(Cmp(">", Var("x"), IntLit(0)), {"x": 1}) is True
    assert eval_formula(Cmp("=", Var("x"), Var("y")), {"x": 2, "y": 3}) is False


def test_eval_formula_rejects_quantifiers():
    quantified = Quant("forall", ("v",), Cmp(">=", Var("v"), IntLit(0)))
    with pytest.raises(EvalError, match="quantified"):
        eval_formula(quantified, {})


def test_euclidean_div_mod_match_smtlib_for_positive_divisors():
    # (div a b), (mod a b) with b > 0: remainder in [0, b)
    for a in range(-9, 10):
        assert eval_term(logic.mod(Var("a"), IntLit(3)), {"a": a}) in (0, 1, 2)
        q = eval_term(logic.div(Var("a"), IntLit(3)), {"a": a})
        r = eval_term(logic.mod(Var("a"), IntLit(3)), {"a": a})
        assert 3 * q + r == a


def test_mul_requires_a_literal_operand():
    with pytest.raises(ValueError, match="nonlinear"):
        logic.mul(Var("x"), Var("y"))


def test_div_requires_positive_literal_divisor():
    with pytest.raises(ValueError):
        logic.div(Var("x"), Var("y"))
    with pytest.raises(ValueError):
        logic.div(Var("x"), IntLit(0))


def test_substitute_term():
    term = logic.add(Var("x"), Var("y"))
    out = substitute(term, {"x": logic.add(Var("z"), IntLit(1))})
    assert out == logic.add(logic.add(Var("z"), IntLit(1)), Var("y"))


def test_substitute_identity():
    phi = Cmp(">", Var("x"), IntLit(0))
    assert substitute(phi, {"x": Var("x")}) == phi


def test_substitute_avoids_capture():
    # (exists v. v = x)[x -> v] must rename the binder, not capture.
    phi = Quant("exists", ("v",), Cmp("=", Var("v"), Var("x")))
    out = substitute(phi, {"x": Var("v")})
    assert isinstance(out, Quant)
    bound = out.vars[0]
    assert bound != "v"
    assert out.body == Cmp("=", Var(bound), Var("v"))
    assert free_vars(out) == {"v"}


def test_free_vars():
    assert free_vars(logic.add(Var("x"), IntLit(1))) == {"x"}
    assert free_vars(Quant("forall", ("v",), Cmp("=", Var("v"), Var("x")))) == {"x"}
    assert free_vars(Cmp(">", IntLit(3), IntLit(2))) == set()


def test_constant_folding():
    assert logic.add(IntLit(2), IntLit(3)) == IntLit(5)
    assert logic.cmp("<", IntLit(1), IntLit(2)) == logic.TRUE
    assert logic.conj([logic.TRUE, logic.TRUE]) == logic.TRUE
    assert logic.conj([logic.FALSE, Cmp("=", Var("x"), IntLit(0))]) == logic.FALSE
    assert logic.disj([]) == logic.FALSE
    assert logic.forall((), logic.FALSE) == logic.FALSE


def test_conj_flattens_nested():
    a = Cmp("=", Var("x"), IntLit(0))
    b = Cmp("=", Var("y"), IntLit(1))
    c = Cmp("=", Var("z"), IntLit(2))
    out = logic.conj([logic.conj([a, b]), c])
    assert isinstance(out, And) and out.args == (a, b, c)


def _compose(sigma, rho):
    return {name: eval_term(term, rho) for name, term in sigma.items()}


def test_substitution_lemma_smoke():
    # The full 1000-triple run lives in the acceptance suite.
    rng = random.Random(7)
    names = ["a", "b", "c", "d"]
    for _ in range(150):
        phi = random_formula(rng, names)
        sigma = {name: random_term(rng, names) for name in rng.sample(names, rng.randint(0, 4))}
        rho = {name: rng.randint(-8, 8) for name in names}
        direct = eval_formula(substitute(phi, sigma), rho)
        composed_env = dict(rho)
        composed_env.update(_compose(sigma, rho))
        assert direct == eval_formula(phi, composed_env)


def test_free_vars_of_substitution_bound():
    rng = random.Random(8)
    names = ["a", "b", "c", "d"]
    for _ in range(200):
        phi = random_formula(rng, names)
        sigma = {name: random_term(rng, names) for name in rng.sample(names, rng.randint(0, 4))}
        out_fv = free_vars(substitute(phi, sigma))
        phi_fv = free_vars(phi)
        allowed = (phi_fv - set(sigma)) | set().union(
            *(free_vars(sigma[x]) for x in set(sigma) & phi_fv)) if sigma else phi_fv
        assert out_fv <= allowed


def test_eval_total_on_quantifier_free():
    rng = random.Random(9)
    names = ["a", "b", "c", "d"]
    for _ in range(300):
        phi = random_formula(rng, names)
        rho = {name: rng.randint(-8, 8) for name in names}
        assert eval_formula(phi, rho) in (True, False)
