"""
Formulas - exact closed forms for the number of full-rank family members.

All values are Python ints (arbitrary precision) or Fractions; nothing here
touches floating point. The factored product

    2^(delta-m) * prod_{j=1..m} (2^k - 2^(delta-j))

is the single source of truth. The expanded forms quoted for the proven
cases are evaluated as independent expressions and compared against it.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from src.model.shape import CaseTag, Shape

logger = logging.getLogger(__name__)


class FormulaMismatchError(ArithmeticError):
    """Raised when two expressions that must agree evaluate differently."""
    def __init__(self, name: str, left: int, right: int):
        self.name = name
        self.left = left
        self.right = right
        super().__init__(f"{name}: {left} != {right}")


def _pow2(exponent: int) -> int:
    if exponent < 0:
        raise ValueError(f"Negative power of two 2^{exponent} in an integer formula")
    return 1 << exponent


def _require(name: str, left: int, right: int) -> int:
    if left != right:
        logger.error(f"Identity check failed for {name}: {left} != {right}")
        raise FormulaMismatchError(name, left, right)
    return left


def _check_range(m: int, delta: int, k: int) -> None:
    if not 1 <= m <= delta <= k:
        raise ValueError(f"Need 1 <= m <= delta <= k, got m={m}, delta={delta}, k={k}")


# ==================== Conjectured count ====================

def conjecture_value(m: int, delta: int, k: int) -> int:
    """2^(delta-m) * prod_{j=1..m} (2^k - 2^(delta-j))."""
    _check_range(m, delta, k)
    product = _pow2(delta - m)
    for j in range(1, m + 1):
        product *= _pow2(k) - _pow2(delta - j)
    return product


def conjecture_value_rhs(m: int, delta: int, k: int) -> int:
    """Equivalent form 2^((1+m)delta - m^2/2 - 3m/2) * prod_{j=1..m} (2^(k-delta+j) - 1)."""
    _check_range(m, delta, k)
    # m^2 + 3m is always even
    product = _pow2((1 + m) * delta - (m * m + 3 * m) // 2)
    for j in range(1, m + 1):
        product *= _pow2(k - delta + j) - 1
    return product


def conjecture_count(shape: Shape) -> int:
    """
    Conjectured number of rank-delta members of the family, checked against
    the equivalent right-hand form.
    """
    m, delta, k = shape.m, shape.delta, shape.k
    return _require(
        f"conjecture forms for {shape}",
        conjecture_value(m, delta, k),
        conjecture_value_rhs(m, delta, k),
    )


def conjecture_count_rhs(shape: Shape) -> int:
    return conjecture_value_rhs(shape.m, shape.delta, shape.k)


def odd_factors(shape: Shape) -> List[int]:
    """The odd factors 2^(k-delta+j) - 1, j = 1..m, of the conjectured count."""
    return [_pow2(shape.k - shape.delta + j) - 1 for j in range(1, shape.m + 1)]


def invertible_fraction(m: int) -> Fraction:
    """prod_{j=1..m} (1 - 2^-j) as a reduced fraction."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    result = Fraction(1)
    for j in range(1, m + 1):
        result *= 1 - Fraction(1, _pow2(j))
    return result


def conjecture_fraction(shape: Shape) -> Fraction:
    """Conjectured share of full-rank members, count / 2^F."""
    return Fraction(conjecture_count(shape), _pow2(shape.free_bits))


# ==================== Proven cases ====================

def count_full_rank_unstructured(m: int, k: int) -> int:
    """Number of m x k matrices over F2 of rank m: prod_{l=0..m-1} (2^k - 2^l)."""
    if not 1 <= m <= k:
        raise ValueError(f"Need 1 <= m <= k, got m={m}, k={k}")
    ascending = 1
    for l in range(m):
        ascending *= _pow2(k) - _pow2(l)
    descending = 1
    for j in range(1, m + 1):
        descending *= _pow2(k) - _pow2(m - j)
    return _require(f"unstructured full-rank forms m={m} k={k}", ascending, descending)


def count_single_persym(delta: int, k: int) -> int:
    """Rank-delta count for one Hankel block: 2^(k+delta-1) - 2^(2delta-2)."""
    _check_range(1, delta, k)
    value = _pow2(k + delta - 1) - _pow2(2 * delta - 2)
    return _require(
        f"single block delta={delta} k={k}", value, conjecture_value(1, delta, k)
    )


def count_double_persym(delta: int, k: int) -> int:
    """Rank-delta count for two blocks: 2^(2k+delta-2) - 3*2^(k+2delta-4) + 2^(3delta-5)."""
    _check_range(2, delta, k)
    expanded = _pow2(2 * k + delta - 2) - 3 * _pow2(k + 2 * delta - 4) + _pow2(3 * delta - 5)
    bracketed = _pow2(delta - 2) * (
        _pow2(2 * k) - 3 * _pow2(k + delta - 2) + _pow2(2 * delta - 3)
    )
    _require(f"double block bracket delta={delta} k={k}", expanded, bracketed)
    return _require(
        f"double block delta={delta} k={k}", expanded, conjecture_value(2, delta, k)
    )


@dataclass(frozen=True)
class TripleExpansionCheck:
    """
    Evaluation of the two printed expansions of the three-block count.

    Attributes:
        factored: 2^(delta-3) prod_{j=1..3} (2^k - 2^(delta-j)), authoritative.
        printed_sum: 2^(3k+delta-3) - 7*2^(2k+2delta-6) + 7*2^(k+3delta-8) + 2^(4delta-9).
        printed_bracket: 2^(delta-3) (2^(3k) - 7*2^(2k+2delta-3) + 7*2^(k+2delta-5) - 2^(3delta-6)).
        corrected_sum: the sum form with the sign of the last term flipped.
    """
    delta: int
    k: int
    factored: int
    printed_sum: int
    printed_bracket: int
    corrected_sum: int

    @property
    def sum_matches(self) -> bool:
        return self.printed_sum == self.factored

    @property
    def bracket_matches(self) -> bool:
        return self.printed_bracket == self.factored

    @property
    def corrected_matches(self) -> bool:
        return self.corrected_sum == self.factored

    def summary(self) -> str:
        def verdict(flag: bool) -> str:
            return "matches" if flag else "differs"
        return (
            f"delta={self.delta} k={self.k}: printed sum form {verdict(self.sum_matches)} "
            f"(off by {self.printed_sum - self.factored}), printed bracket form "
            f"{verdict(self.bracket_matches)} (off by {self.printed_bracket - self.factored}), "
            f"sign-corrected sum form {verdict(self.corrected_matches)}"
        )


def triple_expansion_check(delta: int, k: int) -> TripleExpansionCheck:
    """Evaluate each printed three-block expansion against the factored form."""
    _check_range(3, delta, k)
    factored = conjecture_value(3, delta, k)
    head = _pow2(3 * k + delta - 3) - 7 * _pow2(2 * k + 2 * delta - 6) + 7 * _pow2(k + 3 * delta - 8)
    tail = _pow2(4 * delta - 9)
    printed_bracket = _pow2(delta - 3) * (
        _pow2(3 * k) - 7 * _pow2(2 * k + 2 * delta - 3) + 7 * _pow2(k + 2 * delta - 5)
        - _pow2(3 * delta - 6)
    )
    return TripleExpansionCheck(
        delta=delta,
        k=k,
        factored=factored,
        printed_sum=head + tail,
        printed_bracket=printed_bracket,
        corrected_sum=head - tail,
    )


def count_triple_persym(delta: int, k: int) -> int:
    """
    Rank-delta count for three blocks, from the factored form. The printed
    expansions are evaluated too; disagreement is logged, never substituted.
    """
    check = triple_expansion_check(delta, k)
    if not (check.sum_matches and check.bracket_matches):
        logger.debug(f"Three-block expansion check: {check.summary()}")
    return check.factored


def is_recursion_case(shape: Shape) -> bool:
    return shape.case_tag == CaseTag.UNIT_PREFIX_TRIPLE


def recursion_count(shape: Shape) -> int:
    """
    Count for m >= 4 with m-3 single-row blocks and three blocks of height >= 2:
    the three-block count at (delta-m+3, k) times prod_{j=1..m-3} (2^k - 2^(delta-j)).

    Raises:
        Shape.ShapeError: If the shape is not of that form.
    """
    if not is_recursion_case(shape):
        raise Shape.ShapeError(
            "Recursion needs m >= 4, s1..s(m-3) = 1 and 2 <= s(m-2) <= s(m-1) <= s(m)",
            shape.format(),
        )
    m, delta, k = shape.m, shape.delta, shape.k
    base_delta = delta - m + 3
    base = count_triple_persym(base_delta, k)
    # Base count written with the shifted product index, j = m-2..m.
    shifted = _pow2(delta - m)
    for j in range(m - 2, m + 1):
        shifted *= _pow2(k) - _pow2(delta - j)
    _require(f"recursion base {shape}", base, shifted)
    value = base
    for j in range(1, m - 2):
        value *= _pow2(k) - _pow2(delta - j)
    return _require(f"recursion {shape}", value, conjecture_count(shape))


def theorem_count(shape: Shape) -> Optional[int]:
    """Proven closed form for the shape's case, or None for the general case."""
    tag = shape.case_tag
    if tag == CaseTag.UNIT_ROWS:
        return count_full_rank_unstructured(shape.m, shape.k)
    if tag == CaseTag.SINGLE:
        return count_single_persym(shape.delta, shape.k)
    if tag == CaseTag.DOUBLE:
        return count_double_persym(shape.delta, shape.k)
    if tag == CaseTag.TRIPLE:
        return count_triple_persym(shape.delta, shape.k)
    if tag == CaseTag.UNIT_PREFIX_TRIPLE:
        return recursion_count(shape)
    return None


# ==================== Display ====================

def split_power_of_two(n: int) -> Tuple[int, int]:
    """Write n > 0 as odd * 2^exponent; returns (odd, exponent)."""
    if n <= 0:
        raise ValueError(f"Expected a positive integer, got {n}")
    exponent = (n & -n).bit_length() - 1
    return n >> exponent, exponent


def power_of_two_style(n: int) -> str:
    """'384 = 3 · 2^7' style rendering; plain digits when n is odd."""
    odd, exponent = split_power_of_two(n)
    if exponent == 0:
        return str(n)
    if odd == 1:
        return f"{n} = 2^{exponent}"
    return f"{n} = {odd} · 2^{exponent}"


# ==================== Identity sweep ====================

@dataclass
class SweepReport:
    """Outcome of the algebraic cross-checks over a parameter range."""
    max_k: int
    max_m: int
    checked: int = 0
    failures: List[str] = field(default_factory=list)
    triple_checks: int = 0
    triple_sum_mismatches: int = 0
    triple_bracket_mismatches: int = 0
    triple_corrected_mismatches: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _recursion_shapes(max_m: int, max_k: int):
    for m in range(4, max_m + 1):
        for a in range(2, max_k + 1):
            for b in range(a, max_k + 1):
                for c in range(b, max_k + 1):
                    delta = m - 3 + a + b + c
                    if delta > max_k:
                        break
                    for k in range(delta, max_k + 1):
                        yield Shape((1,) * (m - 3) + (a, b, c), k)


def identity_sweep(max_k: int = 40, max_m: int = 8, recursion_max_k: int = 20) -> SweepReport:
    """
    Run every exact cross-check between closed forms:

    - one block: binomial vs conjecture, 1 <= delta <= k <= max_k;
    - two blocks: trinomial and bracket vs conjecture, 2 <= delta <= k <= max_k;
    - unit rows: conjecture vs unstructured count, m <= k <= min(max_k, 16);
    - delta = k: conjecture / 2^F vs invertible fraction, m <= 6, k <= 12;
    - recursion vs conjecture for m <= max_m, k <= recursion_max_k;
    - three blocks: printed expansions reported, not failed.
    """
    report = SweepReport(max_k=max_k, max_m=max_m)

    def attempt(label: str, fn) -> None:
        report.checked += 1
        try:
            fn()
        except FormulaMismatchError as e:
            report.failures.append(f"{label}: {e}")

    for k in range(1, max_k + 1):
        for delta in range(1, k + 1):
            attempt(f"single delta={delta} k={k}", lambda: count_single_persym(delta, k))
            if delta >= 2:
                attempt(f"double delta={delta} k={k}", lambda: count_double_persym(delta, k))
            if delta >= 3:
                check = triple_expansion_check(delta, k)
                report.triple_checks += 1
                report.triple_sum_mismatches += not check.sum_matches
                report.triple_bracket_mismatches += not check.bracket_matches
                report.triple_corrected_mismatches += not check.corrected_matches

    for k in range(1, min(max_k, 16) + 1):
        for m in range(1, k + 1):
            def unit_rows(m=m, k=k):
                _require(
                    f"unit rows m={m} k={k}",
                    conjecture_count(Shape((1,) * m, k)),
                    count_full_rank_unstructured(m, k),
                )
            attempt(f"unit rows m={m} k={k}", unit_rows)

    for k in range(1, min(max_k, 12) + 1):
        for m in range(1, min(6, k) + 1):
            # Any split of k into m heights has the same conjectured count.
            shape = Shape((1,) * (m - 1) + (k - m + 1,), k)

            def fraction(shape=shape, m=m):
                value = conjecture_fraction(shape)
                expected = invertible_fraction(m)
                if value != expected:
                    raise FormulaMismatchError(
                        f"invertible fraction {shape}", value.numerator * expected.denominator,
                        expected.numerator * value.denominator,
                    )
            attempt(f"invertible fraction {shape}", fraction)

    for shape in _recursion_shapes(max_m, min(max_k, recursion_max_k)):
        attempt(f"recursion {shape}", lambda shape=shape: recursion_count(shape))

    logger.info(
        f"Identity sweep: {report.checked} checks, {len(report.failures)} failures, "
        f"three-block printed sum form differs in {report.triple_sum_mismatches}/"
        f"{report.triple_checks} cases"
    )
    return report
