"""Generator for the MIDSAT family of symport/antiport systems with separation.

Symbol naming (ASCII so everything round-trips through the text format):

    xi[i,s] omega[s] omega1[s]      counters; the trailing 1 marks a prime
    theta[s] theta1[s]              doubling chain feeding kappa
    sigma sigma1[i] nu[i,j]         activation
    Lambda[i] Psi[i]                assignment bits inside membranes 2
    l/g/p[k,i], lb/gb/pb[k,i]       comparison letters (b = barred)
    lLam[k,i], lbPsi[k,i], ...      the same with the Lambda/Psi superscript
    l1/g1/p1[k,i]                   primed letters
    zeta/zetab/zeta1, eta/etab, lambda/lambdab, pi/pib, pi1[k]
    phi/phi1/phi2[k], kappa/kappa1/kappa2/kappa3[k], chi, mu, mub, L, G [k]
    x/xb[i,j] (input), e/eb[i,j], T[i], F[i], yes, no
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import product

from .cnf import CNFFormula
from .engine import StepPolicy, run
from .model import Configuration, Instance, MembraneTree, RecognizerSystem, Rule, initial_configuration
from .multiset import EMPTY, Multiset, Symbol, ms_sum, sym

LETTERS = ("l", "g", "p")
SUPERS = ("Lam", "Psi")


def pairing_index(m: int, n: int) -> int:
    return (n + m) * (n + m + 1) // 2 + n


@dataclass(frozen=True)
class ScheduleConstants:
    n: int
    m: int
    sat: int  # length of the SAT stage; 3n+2m unless overridden

    @property
    def prep(self) -> int:
        return self.n + 5

    @property
    def comp(self) -> int:
        return 2 * self.n + 1

    @property
    def dete(self) -> int:
        return 3

    @property
    def loop(self) -> int:
        return self.prep + self.comp + self.dete

    @property
    def act(self) -> int:
        return self.n + 2

    @property
    def sea(self) -> int:
        return self.n * self.loop

    @property
    def out(self) -> int:
        return 1

    def I_prep(self, k: int) -> int:
        return self.sat + self.act + (k - 1) * self.loop

    def I_comp(self, k: int) -> int:
        return self.I_prep(k) + self.prep

    def I_dete(self, k: int) -> int:
        return self.I_comp(k) + self.comp

    @property
    def I_out(self) -> int:
        return self.sat + self.act + self.sea

    @property
    def total(self) -> int:
        return self.sat + self.act + self.sea + self.out


def schedule_constants(n: int, m: int, sat: int | None = None) -> ScheduleConstants:
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    return ScheduleConstants(n, m, 3 * n + 2 * m if sat is None else sat)


@dataclass(frozen=True)
class FamilyOptions:
    mode: str = "inject"  # "inject" or "full"
    garbage: bool = False
    base_steps: int | None = None  # full mode only: length of the SAT stage
    verbatim: bool = False  # original theta timing, which races for n = 1

    def __post_init__(self):
        if self.mode not in ("inject", "full"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.base_steps is not None and self.mode != "full":
            raise ValueError("base_steps is only meaningful in full mode")


def encode_instance(phi: CNFFormula) -> tuple[int, Multiset]:
    cod: dict[Symbol, int] = defaultdict(int)
    for j, clause in enumerate(phi.clauses, 1):
        for var, pos in clause:
            cod[sym("x" if pos else "xb", var, j)] += 1
    return pairing_index(phi.m, phi.n), Multiset(cod)


# -- symbol helpers ---------------------------------------------------------

def xi(i, s):
    return sym("xi", i, s)


def om(s):
    return sym("omega", s)


def om1(s):
    return sym("omega1", s)


def th(s):
    return sym("theta", s)


def th1(s):
    return sym("theta1", s)


def eps(letter, k, i, barred=False, sup=""):
    """Comparison letter, e.g. eps('l', k, i, True, 'Psi') -> lbPsi[k,i]."""
    return sym(letter + ("b" if barred else "") + sup, k, i)


def N(sup, i):
    return sym("Lambda" if sup == "Lam" else "Psi", i)


def _ms(*items) -> Multiset:
    counts: dict[Symbol, int] = defaultdict(int)
    for item in items:
        if isinstance(item, tuple):
            counts[item[0]] += item[1]
        else:
            counts[item] += 1
    return Multiset(counts)


def _items(x):
    """A symbol, a counted pair ``(symbol, k)``, or a tuple of those."""
    if isinstance(x, Symbol) or (len(x) == 2 and isinstance(x[1], int)):
        return (x,)
    return x


def swap(u, v, tag):
    return Rule.antiport(_ms(*_items(u)), _ms(*_items(v)), tag=tag)


def out(items, tag):
    return Rule.out(_ms(*items), tag=tag)


# -- MIDSAT stage rules ------------------------------------------------------

def _theta_start(n: int, verbatim: bool) -> int:
    """Offset (relative to I_comp(k)) at which theta first enters membrane 1."""
    return -1 if verbatim else min(-1, 2 * n - 5)


def skin_rules(c: ScheduleConstants, verbatim: bool = False) -> list[Rule]:
    n = c.n
    R: list[Rule] = []
    V = range(1, n + 1)

    tag = "xi-counter"
    for i in V:
        for s in range(0, c.sat):
            R.append(swap(xi(i, s), xi(i, s + 1), tag))
    for i in V:
        R.append(swap(xi(i, c.sat), (xi(i, c.sat + 1), sym("nu", i, 0)), tag))
    for i in V:
        for s in range(c.sat + 1, c.I_prep(1) - 1):
            R.append(swap(xi(i, s), xi(i, s + 1), tag))
    for i in V:
        for k in V:
            R.append(swap(xi(i, c.I_prep(k) - 1), (xi(i, c.I_prep(k)), sym("zeta1", k, i)), tag))
    for i in V:
        for k in V:
            for j in range(0, c.loop - 2):
                R.append(swap(xi(i, c.I_prep(k) + j), xi(i, c.I_prep(k) + j + 1), tag))
    for k in V:
        s = c.I_prep(k + 1) - 2
        R.append(swap(xi(1, s), (xi(1, s + 1), sym("mub", k)), tag))
    for i in range(2, n + 1):
        for k in V:
            s = c.I_prep(k + 1) - 2
            R.append(swap(xi(i, s), xi(i, s + 1), tag))
    R.append(swap(xi(1, c.I_out - 1), xi(1, c.I_out), tag))

    # omega: the step at which theta is fetched may move for n = 1
    a = _theta_start(n, verbatim)
    theta_fetch = {c.I_comp(k) + a - 1: k for k in V}  # omega index whose rule brings theta

    def omega_step(s, extra, tag):
        if s in theta_fetch:
            extra = extra + (th(c.I_comp(theta_fetch[s]) + a),)
        R.append(swap(om(s), (om(s + 1),) + extra, tag))

    tag = "omega-first"
    for s in range(0, n):
        R.append(swap(om(s), (om(s + 1), 2), tag))
    for s in range(n, c.sat - 2):
        omega_step(s, (), tag)
    omega_step(c.sat - 2, (om1(c.sat - 1),), tag)
    omega_step(c.sat - 1, (), tag)
    for s in range(c.sat, c.sat + n):
        omega_step(s, (sym("sigma"),), tag)
    for s in range(c.sat + n, c.I_comp(1) - 2):
        omega_step(s, (), tag)

    tag = "omega-comparison"
    for k in V:
        IC = c.I_comp(k)
        omega_step(IC - 2, (), tag)
        for i in range(0, n - 1):
            omega_step(IC + 2 * i - 1, (om1(IC + 2 * i),), tag)
        for i in range(0, n - 1):
            omega_step(IC + 2 * i, (sym("p1", k, i + 1),), tag)
        omega_step(IC + 2 * n - 3, (), tag)
        omega_step(IC + 2 * n - 2, (), tag)
        omega_step(IC + 2 * n - 1, (sym("kappa3", k),), tag)

    tag = "omega-determination"
    for k in V:
        omega_step(c.I_dete(k) - 1, (sym("chi", k),), tag)
    for k in range(1, n):
        for j in range(0, c.dete + c.prep - 2):
            omega_step(c.I_dete(k) + j, (), tag)

    tag = "activation"
    for s in range(0, n - 1):
        R.append(swap(om1(c.sat + s - 1), (om1(c.sat + s), sym("sigma1", s)), tag))
    R.append(swap(om1(c.sat + n - 2), sym("sigma1", n - 1), tag))
    for i in V:
        for j in range(0, n - 1):
            R.append(swap(sym("nu", i, j), (sym("nu", i, j + 1), 2), tag))
    for i in V:
        R.append(swap(sym("nu", i, n - 1), (sym("Lambda", i), sym("Psi", i)), tag))

    tag = "preparation-1"
    for k in V:
        for i in range(1, k):
            R.append(swap((sym("zeta1", k, i), sym("mu", i)), sym("zeta", k, i), tag))
    for k in V:
        for i in range(1, k):
            R.append(swap((sym("zeta1", k, i), sym("mub", i)), sym("zetab", k, i), tag))
    for k in V:
        R.append(swap(sym("zeta1", k, k), sym("zeta", k, k), tag))
    for k in V:
        for i in range(k + 1, n + 1):
            R.append(swap(sym("zeta1", k, i), sym("zetab", k, i), tag))
    for k in V:
        for i in range(1, k):
            R.append(swap(sym("zeta", k, i), (sym("eta", k, i, 0), sym("mu", i)), tag))
    for k in V:
        for i in range(1, k):
            R.append(swap(sym("zetab", k, i), (sym("etab", k, i, 0), sym("mub", i)), tag))
    for k in V:
        R.append(swap(sym("zeta", k, k), sym("eta", k, k, 0), tag))
    for k in V:
        for i in range(k + 1, n + 1):
            R.append(swap(sym("zetab", k, i), sym("etab", k, i, 0), tag))
    for k in V:
        for i in range(1, k + 1):
            for j in range(0, n):
                R.append(swap(sym("eta", k, i, j), (sym("eta", k, i, j + 1), 2), tag))
    for k in V:
        for i in V:
            if i != k:
                for j in range(0, n):
                    R.append(swap(sym("etab", k, i, j), (sym("etab", k, i, j + 1), 2), tag))
    for k in V:
        for i in range(1, k + 1):
            R.append(swap(sym("eta", k, i, n), (sym("lambda", k, i), sym("pi", k, i)), tag))
    for k in V:
        for i in V:
            if i != k:
                R.append(swap(sym("etab", k, i, n), (sym("lambdab", k, i), sym("pib", k, i)), tag))

    tag = "preparation-2"
    for k in V:
        for i in range(1, k + 1):
            R.append(swap(sym("lambda", k, i), (eps("l", k, i), eps("g", k, i)), tag))
    for k in V:
        for i in V:
            if i != k:
                R.append(swap(sym("lambdab", k, i), (eps("l", k, i, True), eps("g", k, i, True)), tag))
    for k in V:
        for i in range(1, k + 1):
            R.append(swap(sym("pi", k, i), (eps("p", k, i), sym("pi1", k)), tag))
    for k in V:
        for i in V:
            if i != k:
                R.append(swap(sym("pib", k, i), (eps("p", k, i, True), sym("pi1", k)), tag))
    for letter in LETTERS:
        for k in V:
            for i in range(1, k + 1):
                R.append(swap(eps(letter, k, i), (eps(letter, k, i, False, "Lam"), eps(letter, k, i, False, "Psi")), tag))
    for letter in LETTERS:
        for k in V:
            for i in V:
                if i != k:
                    R.append(swap(eps(letter, k, i, True), (eps(letter, k, i, True, "Lam"), eps(letter, k, i, True, "Psi")), tag))
    for k in V:
        R.append(swap(sym("pi1", k), (sym("phi", k), sym("phi1", k)), tag))

    tag = "comparison-1"
    for k in V:
        IC = c.I_comp(k)
        for i in range(0, n - 1):
            R.append(swap(om1(IC + 2 * i), (sym("l1", k, i + 1), sym("g1", k, i + 1)), tag))
    for k in V:
        R.append(swap(sym("phi1", k), sym("phi2", k), tag))
    for k in V:
        R.append(out((sym("phi", k), sym("phi2", k)), tag))
    for k in V:
        IC = c.I_comp(k)
        for j in range(0, 2 * n - 4):
            R.append(swap(th(IC + j - 1), th(IC + j), tag))
    for k in V:
        IC = c.I_comp(k)
        R.append(swap(th(IC + 2 * n - 5), (th(IC + 2 * n - 4), th1(IC + 2 * n - 4)), tag))
        R.append(swap(th(IC + 2 * n - 4), (th(IC + 2 * n - 3), 2), tag))
        R.append(swap(th1(IC + 2 * n - 4), th(IC + 2 * n - 3), tag))
        R.append(swap(th(IC + 2 * n - 3), (th(IC + 2 * n - 2), 2), tag))
        R.append(swap(th(IC + 2 * n - 2), (sym("kappa", k), sym("kappa1", k)), tag))

    tag = "comparison-2"
    for k in V:
        R.append(swap(sym("kappa1", k), sym("kappa2", k), tag))
    for letter in LETTERS:
        for sup in SUPERS:
            R.append(out((sym("kappa", n), eps(letter, n, n, False, sup)), tag))
    for letter in LETTERS:
        for k in range(1, n):
            for sup in SUPERS:
                R.append(out((sym("kappa", k), eps(letter, k, n, True, sup)), tag))
    for k in V:
        R.append(out((sym("kappa", k), sym("kappa2", k)), tag))

    tag = "determination"
    target = {"l": "L", "g": "G", "p": "G"}
    for letter in LETTERS:
        for sup in SUPERS:
            R.append(swap((eps(letter, n, n, False, sup), sym("chi", n)), sym(target[letter], n), tag))
    for letter in LETTERS:
        for k in range(1, n):
            for sup in SUPERS:
                R.append(swap((eps(letter, k, n, True, sup), sym("chi", k)), sym(target[letter], k), tag))
    for k in V:
        R.append(out((sym("G", k), sym("L", k)), tag))
    for k in V:
        R.append(swap((sym("G", k), sym("mub", k)), sym("mu", k), tag))

    tag = "output"
    R.append(out((sym("mu", n), sym("yes"), xi(1, c.I_out)), tag))
    R.append(out((sym("mub", n), sym("no"), xi(1, c.I_out)), tag))
    return R


def inner_rules(c: ScheduleConstants) -> list[Rule]:
    n, m = c.n, c.m
    V = range(1, n + 1)
    R: list[Rule] = []

    tag = "activation"
    for i in V:
        R.append(swap(sym("e", i, m), (sym("sigma1", 0), sym("T", i)), tag))
    for i in V:
        R.append(swap(sym("eb", i, m), (sym("sigma1", 0), sym("F", i)), tag))
    for i in range(0, n - 1):
        R.append(swap(sym("sigma1", i), (sym("sigma1", i + 1), sym("sigma")), tag))
    R.append(swap(sym("sigma1", n - 1), sym("sigma"), tag))
    for i in V:
        R.append(swap((sym("sigma"), sym("T", i)), sym("Lambda", i), tag))
    for i in V:
        R.append(swap((sym("sigma"), sym("F", i)), sym("Psi", i), tag))

    tag = "comparison-first"
    for k in V:
        R.append(swap(N("Lam", 1), (eps("p", k, 1, False, "Lam"), sym("phi", k)), tag))
    for k in V:
        R.append(swap(N("Psi", 1), (eps("l", k, 1, False, "Psi"), sym("phi", k)), tag))
    for k in range(2, n + 1):
        R.append(swap(N("Lam", 1), (eps("g", k, 1, True, "Lam"), sym("phi", k)), tag))
    for k in range(2, n + 1):
        R.append(swap(N("Psi", 1), (eps("p", k, 1, True, "Psi"), sym("phi", k)), tag))

    tag = "comparison-odd"
    # (primed letter, Lambda result, Psi result) for the unbarred and barred references
    table = {
        False: {"l": ("l", "l"), "g": ("g", "g"), "p": ("p", "l")},
        True: {"l": ("l", "l"), "g": ("g", "g"), "p": ("g", "p")},
    }
    for letter in LETTERS:
        for barred in (False, True):
            lam_res, psi_res = table[barred][letter]
            for sup, res in (("Lam", lam_res), ("Psi", psi_res)):
                for k in V:
                    idx = [i for i in range(2, n + 1) if (i != k if barred else i <= k)]
                    for i in idx:
                        R.append(swap((sym(letter + "1", k, i - 1), N(sup, i)), eps(res, k, i, barred, sup), tag))

    tag = "comparison-even"
    for letter in LETTERS:
        for sup in SUPERS:
            for k in range(1, n):
                for i in range(1, k + 1):
                    R.append(swap(eps(letter, k, i, False, sup), (N(sup, i), sym(letter + "1", k, i)), tag))
            for i in range(1, n):
                R.append(swap(eps(letter, n, i, False, sup), (N(sup, i), sym(letter + "1", n, i)), tag))
    for letter in LETTERS:
        for sup in SUPERS:
            for k in V:
                for i in range(1, n):
                    if i != k:
                        R.append(swap(eps(letter, k, i, True, sup), (N(sup, i), sym(letter + "1", k, i)), tag))

    tag = "comparison-last"
    for letter in LETTERS:
        for sup in SUPERS:
            R.append(swap(eps(letter, n, n, False, sup), (N(sup, n), sym("kappa3", n)), tag))
    for letter in LETTERS:
        for sup in SUPERS:
            for k in range(1, n):
                R.append(swap(eps(letter, k, n, True, sup), (N(sup, n), sym("kappa3", k)), tag))
    return R


def environment_supply(c: ScheduleConstants, verbatim: bool = False) -> set[Symbol]:
    n = c.n
    V = range(1, n + 1)
    E: set[Symbol] = set()
    E.update(xi(i, s) for i in V for s in range(1, c.I_out))
    E.add(xi(1, c.I_out))
    E.update(om(s) for s in range(1, c.I_out - c.dete + 1))
    E.update(om1(s) for s in range(c.sat - 1, c.sat + n - 1))
    E.update(om1(c.I_comp(k) + 2 * i) for i in range(0, n - 1) for k in V)
    lo = _theta_start(n, verbatim)
    E.update(th(c.I_comp(k) + j) for j in range(lo, 2 * n - 1) for k in V)
    E.update(th1(c.I_comp(k) + 2 * n - 4) for k in V)
    E.add(sym("sigma"))
    E.update(sym("sigma1", i) for i in range(0, n))
    E.update(s for i in V for s in (sym("Lambda", i), sym("Psi", i)))
    E.update(sym("nu", i, j) for i in V for j in range(0, n))
    for k in V:
        for i in V:
            forms = []
            if i <= k:
                forms.append(False)
            if i != k:
                forms.append(True)
            for barred in forms:
                b = "b" if barred else ""
                for letter in LETTERS:
                    E.add(eps(letter, k, i, barred))
                    for sup in SUPERS:
                        E.add(eps(letter, k, i, barred, sup))
                E.add(sym("lambda" + b, k, i))
                E.add(sym("pi" + b, k, i))
                E.add(sym("zeta" + b, k, i))
                E.update(sym("eta" + b, k, i, j) for j in range(0, n + 1))
            E.add(sym("zeta1", k, i))
        for i in range(1, n):
            E.update(sym(letter + "1", k, i) for letter in LETTERS)
        E.update(sym(name, k) for name in ("pi1", "phi", "phi1", "phi2", "kappa", "kappa1", "kappa2",
                                           "kappa3", "chi", "mu", "mub", "L", "G"))
    return E


def initial_skin(n: int) -> Multiset:
    return _ms(sym("yes"), sym("no"), om(0), *[xi(i, 0) for i in range(1, n + 1)])


# -- base SAT stage (full mode) ---------------------------------------------

@dataclass
class BaseSatPhase:
    skin_rules: list[Rule]
    inner_rules: list[Rule]
    symbols: set[Symbol]
    env: set[Symbol]
    partition1: set[Symbol]
    skin_seed: Multiset
    inner_seed: Multiset
    input_alphabet: set[Symbol]
    steps: int
    notes: list[str] = field(default_factory=list)


def base_min_steps(n: int, m: int) -> int:
    return 3 * n + 2 * m - 1


def build_base_sat_phase(n: int, m: int) -> BaseSatPhase:
    """A SAT stage satisfying the interface the MIDSAT rules expect.

    Generation: round i separates at step 3i-2 (children: x_i true / false),
    then two steps restore the duplicated bookkeeping objects. Checking:
    clause j takes steps 3n+2j-2 and 3n+2j-1; the last one leaves e[i,m] or
    eb[i,m] in every satisfying membrane, with the matching T/F object parked
    in the skin. The skin receives every object it hands to membranes 2 from
    timed supply chains, each delivering exactly when first needed so nothing
    can fire before its separation.
    """
    V = range(1, n + 1)
    skin: list[Rule] = []
    inner: list[Rule] = []
    env: set[Symbol] = set()
    gamma1: set[Symbol] = set()
    symbols: set[Symbol] = set()
    sigma_in = {sym(k, i, j) for i in V for j in range(1, m + 1) for k in ("x", "xb")}

    def vt(kind, j, i):
        return sym(kind, j, i)

    tag = "base-generation"
    for i in V:
        last = i == n
        if not last:
            inner.append(swap(sym("z", i), (vt("vt", i, i + 1), sym("h", i)), tag))
            inner.append(swap(sym("zh", i), (vt("vfh", i, i + 1), sym("hh", i)), tag))
            inner.append(swap(sym("w", i), (sym("c", i), sym("c1", i)), tag))
            inner.append(swap(sym("wh", i), (sym("c", i), sym("c1", i)), tag))
            for j in range(1, i):
                for kind, twin in (("vt", "vth"), ("vf", "vfh")):
                    pair = (vt(kind, j, i + 1), vt(twin, j, i + 1))
                    inner.append(swap(vt(kind, j, i), pair, tag))
                    inner.append(swap(vt(twin, j, i), pair, tag))
            inner.append(swap(sym("h", i), (vt("vth", i, i + 1), sym("s", i + 1)), tag))
            inner.append(swap(sym("hh", i), (vt("vf", i, i + 1), sym("s", i + 1)), tag))
            nxt = (sym("z", i + 1), sym("w", i + 1)) if i + 1 < n else (sym("z", i + 1),)
            nxth = (sym("zh", i + 1), sym("wh", i + 1)) if i + 1 < n else (sym("zh", i + 1),)
            inner.append(swap(sym("c", i), nxt, tag))
            inner.append(swap(sym("c1", i), nxth, tag))
        else:
            for j in range(1, n):
                inner.append(swap(vt("vt", j, n), sym("T", j), tag))
                inner.append(swap(vt("vth", j, n), sym("T", j), tag))
                inner.append(swap(vt("vf", j, n), sym("F", j), tag))
                inner.append(swap(vt("vfh", j, n), sym("F", j), tag))
            inner.append(swap(sym("z", n), (sym("T", n), sym("d", 1)), tag))
            inner.append(swap(sym("zh", n), (sym("F", n), sym("d", 1)), tag))
        inner.append(Rule.separation(sym("s", i), tag=tag))
        gamma1.update({sym("zh", i), sym("wh", i)})
        gamma1.update(vt(k, j, i) for j in range(1, i) for k in ("vth", "vfh"))
    gamma1.update(vt(k, j, n) for j in range(1, n) for k in ("vth", "vfh"))

    tag = "base-checking"
    for j in range(1, m + 1):
        for i in V:
            inner.append(swap((sym("d", j), sym("T", i)), sym("xd", i, j, n), tag))
            inner.append(swap((sym("d", j), sym("F", i)), sym("xbd", i, j, n), tag))
        for i in V:
            if j < m:
                inner.append(swap(sym("xd", i, j, n), (sym("d", j + 1), sym("T", i)), tag))
                inner.append(swap(sym("xbd", i, j, n), (sym("d", j + 1), sym("F", i)), tag))
            else:
                inner.append(swap(sym("xd", i, m, n), sym("e", i, m), tag))
                inner.append(swap(sym("xbd", i, m, n), sym("eb", i, m), tag))

    tag = "base-duplication"
    for i in V:
        for j in range(1, m + 1):
            for src, dst in (("x", "xd"), ("xb", "xbd")):
                skin.append(swap(sym(src, i, j), (sym(dst, i, j, 1), 2), tag))
                for t in range(1, n):
                    skin.append(swap(sym(dst, i, j, t), (sym(dst, i, j, t + 1), 2), tag))
                env.update(sym(dst, i, j, t) for t in range(1, n + 1))

    # deliveries: (step, multiplicity exponent) -> objects
    deliveries: dict[tuple[int, int], list[Symbol]] = defaultdict(list)
    for i in V:
        t = 3 * i - 2
        if i < n:
            half = i - 1
            deliveries[(t, half)] += [vt("vt", i, i + 1), sym("h", i), vt("vfh", i, i + 1), sym("hh", i)]
            deliveries[(t, i)] += [sym("c", i), sym("c1", i)]
            for j in range(1, i):
                deliveries[(t, half)] += [vt(k, j, i + 1) for k in ("vt", "vth", "vf", "vfh")]
            t2 = 3 * i - 1
            deliveries[(t2, half)] += [vt("vth", i, i + 1), vt("vf", i, i + 1)]
            deliveries[(t2, i)] += [sym("s", i + 1), sym("z", i + 1), sym("zh", i + 1)]
            if i + 1 < n:
                deliveries[(t2, i)] += [sym("w", i + 1), sym("wh", i + 1)]
        else:
            deliveries[(t, n - 1)] += [s for j in V for s in (sym("T", j), sym("F", j))]
            deliveries[(t, n)] += [sym("d", 1)]
    late = 3 * n
    deliveries[(late, n)] += [sym("d", j) for j in range(2, m + 1)]
    deliveries[(late, n)] += [sym(k, i, m) for i in V for k in ("e", "eb")]

    tag = "base-supply"
    seed: dict[Symbol, int] = defaultdict(int)
    chain = 0
    for (t, c_exp), objs in sorted(deliveries.items(), key=lambda kv: (kv[0], [str(o) for o in kv[1]])):
        env.update(objs)
        doublings = min(c_exp, t - 1)
        for a in range(0, len(objs), 2):
            chain += 1
            pair = tuple(objs[a:a + 2])
            seed[sym("q", chain, 0)] += 2 ** (c_exp - doublings)
            for s in range(0, t - 1):
                nxt = (sym("q", chain, s + 1), 2) if s < doublings else (sym("q", chain, s + 1),)
                skin.append(swap(sym("q", chain, s), nxt, tag))
                env.add(sym("q", chain, s + 1))
            skin.append(swap(sym("q", chain, t - 1), pair, tag))

    inner_seed = [sym("s", 1), sym("z", 1), sym("zh", 1)]
    if n > 1:
        inner_seed += [sym("w", 1), sym("wh", 1)]
    for r in skin + inner:
        symbols |= r.symbols()
    symbols |= set(seed) | set(inner_seed) | sigma_in | env
    return BaseSatPhase(skin, inner, symbols, env, gamma1 & symbols, Multiset(seed), _ms(*inner_seed),
                        sigma_in, 3 * n + 2 * m)


# -- garbage -----------------------------------------------------------------

PROTECTED = {"yes", "no", "xi", "omega", "mu", "mub"}


def garbage_rules(skin: list[Rule], inner: list[Rule], skin_seed, inner_seed, inputs) -> tuple[list[Rule], list[Rule]]:
    """Symport-out rules for objects that no rule can ever consume where they sit.

    A symbol is inert in the skin region if no skin rule takes it from inside
    and no inner rule takes it from outside; it is inert inside a membrane 2
    if no inner rule takes it from there and it is also inert in the skin, so
    flushed objects keep moving until they reach the environment.
    """
    used_skin = set()
    used_inner = set()
    for r in skin:
        used_skin |= set(r.inner())
    for r in inner:
        used_inner |= set(r.inner())
        used_skin |= set(r.outer())
    reach_skin = set(skin_seed) | set(inputs)
    reach_inner = set(inner_seed)
    for r in skin:
        reach_skin |= set(r.outer()) if r.kind == "in" else set(r.v)
    for r in inner:
        reach_skin |= set(r.inner())
        reach_inner |= set(r.v) | (set(r.u) if r.kind == "in" else set())
    dead_skin = sorted(s for s in reach_skin if s not in used_skin and s.name not in PROTECTED)
    dead_inner = sorted(s for s in reach_inner if s not in used_inner and s not in used_skin
                        and s.name not in PROTECTED)
    return ([Rule.out(Multiset([s]), tag="garbage") for s in dead_skin],
            [Rule.out(Multiset([s]), tag="garbage") for s in dead_inner])


# -- system assembly ---------------------------------------------------------

_NAME_RE = re.compile(r"^midsat\[(.*)\]$")


def system_name(n, m, opts: FamilyOptions, sat: int) -> str:
    parts = [f"n={n}", f"m={m}", f"mode={opts.mode}", f"sat={sat}"]
    if opts.garbage:
        parts.append("garbage")
    if opts.verbatim:
        parts.append("verbatim")
    return f"midsat[{','.join(parts)}]"


def parse_system_name(name: str) -> dict | None:
    match = _NAME_RE.match(name.strip())
    if not match:
        return None
    info = {"garbage": False, "verbatim": False}
    for part in match.group(1).split(","):
        key, eq, value = part.partition("=")
        if eq:
            info[key] = value if key == "mode" else int(value)
        else:
            info[key] = True
    return info


def build_family_system(n: int, m: int, opts: FamilyOptions = FamilyOptions()) -> RecognizerSystem:
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    base = build_base_sat_phase(n, m) if opts.mode == "full" else None
    sat = opts.base_steps if opts.base_steps is not None else 3 * n + 2 * m
    if base is not None and sat < base_min_steps(n, m):
        raise ValueError(f"the SAT stage needs at least {base_min_steps(n, m)} steps")
    c = schedule_constants(n, m, sat)
    skin = skin_rules(c, opts.verbatim)
    inner = inner_rules(c)
    env = environment_supply(c, opts.verbatim)
    skin_seed = initial_skin(n)
    inner_seed = EMPTY
    gamma1: set[Symbol] = set()
    inputs = {sym(k, i, j) for i in range(1, n + 1) for j in range(1, m + 1) for k in ("x", "xb")}
    extra = {sym(k, i, m) for i in range(1, n + 1) for k in ("e", "eb")}
    extra |= {sym(k, i) for i in range(1, n + 1) for k in ("T", "F")}
    if base is not None:
        skin = base.skin_rules + skin
        inner = base.inner_rules + inner
        env |= base.env
        skin_seed = ms_sum(skin_seed, base.skin_seed)
        inner_seed = base.inner_seed
        gamma1 = base.partition1
        extra |= base.symbols
    if opts.garbage:
        g_skin, g_inner = garbage_rules(skin, inner, skin_seed, inner_seed, inputs)
        skin = skin + g_skin
        inner = inner + g_inner
    alphabet = set(env) | set(skin_seed) | set(inner_seed) | inputs | extra
    for r in skin + inner:
        alphabet |= r.symbols()
    return RecognizerSystem.build(
        system_name(n, m, opts, sat),
        alphabet,
        env=env,
        input_alphabet=inputs,
        partition1=gamma1,
        tree=MembraneTree.nested(2),
        initial={1: skin_seed, 2: inner_seed},
        rules={1: skin, 2: inner},
        input_membrane=1,
    )


def family_info(system: RecognizerSystem) -> dict | None:
    return parse_system_name(system.name)


def build_injected_configuration(phi: CNFFormula, system: RecognizerSystem) -> Configuration:
    """The configuration reached after the SAT stage, without running that stage.

    The skin part comes from running the skin rules alone (they only talk to
    the environment until then). Each satisfying assignment gets a membrane 2
    holding e/eb for the variable of the first true literal of the last
    clause plus T/F for every other variable; the skin keeps the T/F object
    of that variable. Other membranes 2 are empty.
    """
    info = family_info(system)
    if info is None or info.get("mode") != "inject":
        raise ValueError("system was not generated in inject mode")
    n, m = phi.n, phi.m
    if (info["n"], info["m"]) != (n, m):
        raise ValueError(f"system is for n={info['n']}, m={info['m']}; formula has n={n}, m={m}")
    if len(system.tree.parent) != 2:
        raise ValueError("unexpected membrane structure")
    sat = info["sat"]
    reduced = RecognizerSystem.build(
        "reduced", system.alphabet, env=system.env, input_alphabet=system.input_alphabet,
        partition1=system.partition1, tree=MembraneTree({1: None}),
        initial={1: system.initial[1]}, rules={1: system.rules[1]},
    )
    cfg = initial_configuration(reduced)
    cfg, _ = run(reduced, cfg, StepPolicy(), max_steps=sat, keep_reports=False, stop_at=sat)
    skin = dict(cfg.by_id(1).contents)
    membranes = []
    for bits in product((0, 1), repeat=n):
        if not phi.satisfied_by(bits):
            membranes.append(EMPTY)
            continue
        var, pos = phi.first_true_literal(m - 1, bits)
        content = {sym("e" if pos else "eb", var, m): 1}
        for i in range(1, n + 1):
            if i != var:
                content[sym("T" if bits[i - 1] else "F", i)] = 1
        tf = sym("T" if pos else "F", var)
        skin[tf] = skin.get(tf, 0) + 1
        membranes.append(Multiset(content))
    instances = [Instance(1, 1, 0, Multiset(skin))]
    instances += [Instance(2 + a, 2, 1, content) for a, content in enumerate(membranes)]
    return Configuration(tuple(instances), cfg.env, sat)


def assignment_of(system: RecognizerSystem, cfg: Configuration) -> dict[int, tuple[int, ...]]:
    """Map membrane-2 instance ids to the assignment they encode (by Lambda/Psi or T/F)."""
    n = family_info(system)["n"]
    found = {}
    for inst in cfg.with_label(2):
        bits = []
        for i in range(1, n + 1):
            if inst.contents[sym("Lambda", i)] or inst.contents[sym("T", i)]:
                bits.append(1)
            elif inst.contents[sym("Psi", i)] or inst.contents[sym("F", i)]:
                bits.append(0)
            else:
                bits.append(None)
        found[inst.id] = tuple(bits)
    return found
