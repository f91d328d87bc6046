"""The ten acceptance criteria, each reported as one PASS/FAIL line.

Every criterion collects all of its sub-checks before deciding, so a FAIL
line names every mismatch rather than only the first one.
"""

import time
from math import log2, sqrt

import numpy as np
import pytest

from conftest import C2, HC, group
from reference_data import (
    CENSUS_N3,
    CENSUS_N4,
    CONTRACTED,
    ISING_G0,
    ISING_M2_N10,
    ISING_STEP,
    ORBIT_PARTITIONS,
    SUBGROUP_ROWS,
)
from stabatlas.cli import main as cli_main
from stabatlas.clifford_core import CORE_RELATIONS, gate, verify_relations
from stabatlas.dicke_cone import (
    DickeSpec,
    dicke_entropy,
    dicke_entropy_vector,
    star_realization,
    symmetrized_entropy,
)
from stabatlas.graph_atlas import (
    batch_entropy_vectors,
    contracted_graph,
    load_named_state,
    orbit_partition_census,
    orbit_states,
    reachability_graph,
)
from stabatlas.group_engine import (
    clear_memo,
    clifford_order_formula,
    close_subgroup,
    double_cosets,
    local_subgroup,
    orbit_size,
    phase_reduction,
    stabilizer_subgroup,
)
from stabatlas.magic_kit import (
    Spectrum,
    capacity,
    capacity_pair_form,
    capacity_variance_form,
    ising_magic_scan,
    m2_bounds,
    m2_bruteforce,
    m2_pair_closed_form,
    m2_spectrum_estimate,
    modified_renyi,
    renyi,
)
from stabatlas.stab_census import enumerate_stabilizer_states, entropy_census
from stabatlas.state_space import DenseState, apply, make_state

S2 = 1 / np.sqrt(2)


class Criterion:
    """Collects named sub-checks and prints a single verdict line."""

    def __init__(self, number, title, budget_s, capsys):
        self.number = number
        self.title = title
        self.budget_s = budget_s
        self.capsys = capsys
        self.failures = []
        self.checks = 0
        self.start = time.perf_counter()

    def check(self, label, ok, detail=""):
        self.checks += 1
        if not ok:
            self.failures.append(f"{label}: {detail}" if detail else label)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        self.check("time budget", elapsed <= self.budget_s, f"{elapsed:.1f} s > {self.budget_s} s")
        verdict = "PASS" if not self.failures else "FAIL"
        line = f"CRITERION {self.number:>2} {verdict}  {self.title} ({self.checks} checks, {elapsed:.1f} s)"
        with self.capsys.disabled():
            print("\n" + line)
            for f in self.failures:
                print(f"    - {f}")
        assert not self.failures, "; ".join(self.failures)


@pytest.fixture
def criterion(capsys):
    return lambda number, title, budget_s: Criterion(number, title, budget_s, capsys)


def _g36():
    return apply(gate("P1").matrix @ gate("H1").matrix, make_state("zeros", 2))


def _g288():
    return apply(gate("C32", 3), make_state("product", [[S2, 1j * S2], [0, 1], [S2, S2]]))


def _generic(seed=1):
    v = np.random.default_rng(seed).normal(size=(2, 8))
    return DenseState.from_unnormalized(v[0] + 1j * v[1])


def _dirichlet_spectra(seed, count, rank_range):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        r = int(rng.integers(*rank_range))
        yield Spectrum.from_values(rng.dirichlet(np.full(r, 0.7)), normalize=True)


def _doubled(values):
    d = 1 << (len(values) - 1).bit_length()
    amps = np.zeros(d * d)
    for i, v in enumerate(values):
        amps[i * d + i] = np.sqrt(v)
    return DenseState.from_unnormalized(amps)


def test_criterion_01_relation_suite(criterion):
    c = criterion(1, "relation suite holds exactly", 1.0)
    results = verify_relations()
    names = {r.relation.name for r in results}
    c.check("16 core identities present", set(CORE_RELATIONS) <= names and len(CORE_RELATIONS) == 16)
    for r in results:
        c.check(f"{r.relation.name} {r.relation.left} = {r.relation.right}", r.passed, r.detail)
    c.finish()


def test_criterion_02_subgroup_table(criterion):
    c = criterion(2, "all 29 subgroup rows reproduce", 120.0)
    clear_memo()
    c.check("29 rows", len(SUBGROUP_ROWS) == 29)
    for gens, order, diam, factor, diam_mod in SUBGROUP_ROWS:
        got = phase_reduction(list(gens))
        have = (got["order"], got["diameter"], got["phase_factor"], got["diameter_mod_phase"])
        want = (order, diam, factor, diam_mod)
        c.check("{" + ",".join(gens) + "}", have == want, f"got {have}, expected {want}")
    c.finish()


def test_criterion_03_clifford_orders(criterion):
    c = criterion(3, "Clifford orders and diversity ratios", 60.0)
    c1p, c1 = group(("H1", "P1"), False), group(("H1", "P1"))
    c2p, c2 = group(C2, False), group(C2)
    c.check("|C1|", (c1p.order, c1.order) == (192, 24), f"{c1p.order}/{c1.order}")
    c.check("|C2|", (c2p.order, c2.order) == (92160, 11520), f"{c2p.order}/{c2.order}")
    for n in (1, 2):
        f = clifford_order_formula(n)
        enum = (c1p, c1) if n == 1 else (c2p, c2)
        c.check(f"formula n={n}", (f.with_phase_order, f.mod_phase_order) == (enum[0].order, enum[1].order))
    ratios = [clifford_order_formula(n).ratio for n in range(1, 5)]
    c.check("diversity ratios", ratios == [1, 20, 6720, 36556800], str(ratios))
    loc = local_subgroup(c2)
    c.check("enumerated ratio n=2", c2.order // len(loc) == 20, f"{c2.order}/{len(loc)}")
    c.finish()


def test_criterion_04_stabilizer_census(criterion):
    c = criterion(4, "stabilizer censuses n = 1..5", 15 * 60.0)
    counts = {1: sum(1 for _ in enumerate_stabilizer_states(1))}
    rows = {}
    for n in range(2, 6):
        rows[n] = entropy_census(n)
        counts[n] = sum(r.count for r in rows[n])
    want = {1: 6, 2: 60, 3: 1080, 4: 36720, 5: 2423520}
    c.check("state counts", counts == want, str(counts))
    distinct = {n: len(rows[n]) for n in (3, 4, 5)}
    c.check("distinct vectors", distinct == {3: 5, 4: 18, 5: 93}, str(distinct))
    c.check("n=3 multiplicities", {r.vector: r.count for r in rows[3]} == CENSUS_N3)
    c.check("n=4 multiplicities", {r.vector: r.count for r in rows[4]} == CENSUS_N4)
    nonholo = [(r.vector, r.count) for r in rows[4] if not r.holographic]
    c.check("n=4 non-holographic", nonholo == [((1,) * 7, 2592)], str(nonholo))
    mmi5 = sum(1 for r in rows[5] if "MMI" in r.violated)
    c.check("n=5 MMI-violating vectors", mmi5 == 16, str(mmi5))
    c.finish()


def test_criterion_05_reachability_orbits(criterion):
    c = criterion(5, "reachability orbit sizes and partitions", 5 * 60.0)
    hc, c2 = group(HC), group(C2)
    hc_cases = [
        ("g24", make_state("zeros", 2), 24, 48),
        ("g36", _g36(), 36, 32),
        ("g144", make_state("ghz", 3), 144, 8),
        ("g288", _g288(), 288, 4),
        ("g1152", _generic(), 1152, 1),
    ]
    for name, state, orbit, stab in hc_cases:
        got = (orbit_size(hc, state), len(stabilizer_subgroup(hc, state)))
        c.check(f"HC {name}", got == (orbit, stab), f"orbit/stab {got}, expected {(orbit, stab)}")
    for name, state, orbit in [("W3", make_state("w", 3), 288), ("D42", make_state("dicke", 4, 2), 576)]:
        got = orbit_size(hc, state)
        c.check(f"HC {name}", got == orbit, f"{got}, expected {orbit}")
    c2_cases = [
        ("zeros", make_state("zeros", 2), 60),
        ("generic", _generic(), 11520),
        ("W3", make_state("w", 3), 2880),
        ("D42", make_state("dicke", 4, 2), 5760),
    ]
    for name, state, orbit in c2_cases:
        got = orbit_size(c2, state)
        c.check(f"C2 {name}", got == orbit, f"{got}, expected {orbit}")
    # the three stabilizer orbit sizes under C2, over every four-qubit stabilizer state
    sizes = sorted(orbit_partition_census(4, c2))
    c.check("C2 stabilizer orbit sizes", sizes == [60, 768, 11520], f"{sizes}, expected [60, 768, 11520]")
    for n in (3, 4):
        got = orbit_partition_census(n)
        c.check(f"orbit partition n={n}", got == ORBIT_PARTITIONS[n], str(got))
    c.finish()


def _homogeneous(table, state, graph_table_classes):
    """Independent audit: every class member's state has the class's entropy vector."""
    n = state.n_qubits
    for members in graph_table_classes:
        vecs = batch_entropy_vectors(orbit_states(table, sorted(members), state), n)
        if np.max(np.abs(vecs - vecs[0])) > 1e-8:
            return False
    return True


def test_criterion_06_contracted_graphs(criterion):
    c = criterion(6, "contracted graphs and maximal colourings", 10 * 60.0)
    states = {
        "g24": make_state("zeros", 2),
        "g36": _g36(),
        "g144": make_state("ghz", 3),
        "g288": _g288(),
        "g1152": _generic(),
        "generic": _generic(),
        "w3": make_state("w", 3),
        "d42": make_state("dicke", 4, 2),
    }
    for (which, name), want in CONTRACTED.items():
        table = group(HC if which == "HC" else C2)
        state = states[name]
        g = contracted_graph(table, state)
        c.check(f"{which} {name} vertices", g.n_vertices == want, f"{g.n_vertices}, expected {want}")
        dc = double_cosets(table, local_subgroup(table), stabilizer_subgroup(table, state))
        c.check(f"{which} {name} homogeneous", _homogeneous(table, state, dc.classes))
    six = load_named_state("six_qubit_g144")
    six_colors = reachability_graph(group(HC), six).n_colors
    six_stab = len(stabilizer_subgroup(group(HC), six))
    c.check(
        "six-qubit state: 5 colours on g144",
        six_colors == 5 and six_stab == 8,
        f"{six_colors} colours, stabilizer order {six_stab} (not a g144 orbit)",
    )
    eight = load_named_state("eight_qubit_g1152")
    eight_colors = reachability_graph(group(HC), eight).n_colors
    c.check("eight-qubit state: 18 colours", eight_colors == 18, str(eight_colors))
    c.finish()


def _exact_d31():
    s1 = 2 / 3 * log2(3 / 2) + 1 / 3 * log2(3)
    s2 = 5 / 6 * log2(6 / 5) + 1 / 6 * log2(6)
    a, b = (3 - sqrt(5)) / 6, (3 + sqrt(5)) / 6
    s3 = a * log2(1 / a) + b * log2(1 / b)
    return [(s1, s1, s1), (s3, s1, s1), (s1, s3, s1), (1.0, 1.0, s1), (s2, s2, s1)]


def test_criterion_07_dicke_entropies(criterion):
    c = criterion(7, "Dicke entropies, stars and MMI", 60.0)
    worst = 0.0
    for N in range(1, 9):
        for k in range(1, N + 1):
            spec = DickeSpec(N, k)
            amps = spec.state().amplitudes
            for ell in range(N + 1):
                p = np.linalg.svd(amps.reshape(2 ** (N - ell), 2**ell), compute_uv=False) ** 2
                p = p[p > 1e-15]
                worst = max(worst, abs(dicke_entropy(spec, ell) + float((p * np.log(p)).sum())))
    c.check("closed form vs SVD", worst < 1e-10, f"max error {worst:.2e}")
    table = group(HC)
    vecs = batch_entropy_vectors(orbit_states(table, range(table.order), DickeSpec(3, 1).state()), 3)
    distinct = {tuple(np.round(v, 9)) for v in vecs}
    exact = _exact_d31()
    matched = all(np.min(np.max(np.abs(vecs - np.array(w)), axis=1)) < 1e-10 for w in exact)
    c.check("D31 orbit vectors", len(distinct) == 5 and matched, f"{len(distinct)} distinct")
    star_err = 0.0
    for N in range(2, 7):
        for k in range(1, N):
            spec = DickeSpec(N, k)
            for ell in range(1, min(-(-N // 2), N - 1) + 1):
                _, total = star_realization(spec, ell)
                star_err = max(star_err, abs(total - symmetrized_entropy(spec, ell)))
    c.check("star min-cuts", star_err < 1e-12, f"max error {star_err:.2e}")
    bad = [(N, k) for N in range(4, 9) for k in range(1, N) if dicke_entropy_vector(DickeSpec(N, k)).mmi != "violated"]
    c.check("MMI violated for N > 3", not bad, str(bad))
    sat = [dicke_entropy_vector(DickeSpec(3, k)).mmi for k in (1, 2)]
    c.check("MMI saturated at N = 3", sat == ["saturated", "saturated"], str(sat))
    c.finish()


def test_criterion_08_magic_oracles(criterion):
    c = criterion(8, "magic oracles and bounds", 120.0)
    err = max(
        abs(m2_spectrum_estimate(sp) - m2_bruteforce(_doubled(list(sp.values))))
        for sp in _dirichlet_spectra(8, 100, (1, 9))
    )
    c.check("estimate = brute force (100 spectra)", err < 1e-10, f"max error {err:.2e}")
    lams = np.linspace(0.01, 0.99, 50)
    err = max(abs(m2_spectrum_estimate([x, 1 - x]) - m2_pair_closed_form(x)) for x in lams)
    brute = max(abs(m2_bruteforce(_doubled(sorted([x, 1 - x], reverse=True))) - m2_pair_closed_form(x)) for x in lams)
    c.check("pair closed form (50 values)", max(err, brute) < 1e-10, f"{err:.2e}/{brute:.2e}")
    bound_fail = 0
    for sp in _dirichlet_spectra(88, 1000, (8, 9)):
        try:
            b = m2_bounds(sp)
        except ArithmeticError:
            bound_fail += 1
            continue
        upper = min(2 * renyi(sp, 2), 4 * (sp.s_max - renyi(sp, 0.5)))
        if not (b.estimate <= upper + 1e-10 and b.estimate - 1e-10 <= b.averaged <= b.upper_2s2 + 1e-10):
            bound_fail += 1
    c.check("entropy bounds and averaged estimate", bound_fail == 0, f"{bound_fail} violations")
    pair_fail = [
        x
        for x in np.linspace(0.005, 0.995, 199)
        if not 0.5 * abs(capacity([x, 1 - x], 2.0)) - 1e-12 <= m2_pair_closed_form(x) <= abs(capacity([x, 1 - x], 1.0)) + 1e-12
    ]
    c.check("pair capacity bound", not pair_fail, str(pair_fail[:3]))
    cap_err = 0.0
    fd_err = 0.0
    for sp in _dirichlet_spectra(9, 1000, (2, 9)):
        for n in (1.0, 2.0, 3.0):
            cap_err = max(cap_err, abs(capacity_pair_form(sp, n) - capacity_variance_form(sp, n)))
    for sp in _dirichlet_spectra(10, 50, (2, 9)):
        for n in (1.0, 2.0):
            fd = (modified_renyi(sp, n + 1e-4) - modified_renyi(sp, n - 1e-4)) / 2e-4
            fd_err = max(fd_err, abs(capacity(sp, n) - fd))
    c.check("capacity pair = variance form", cap_err < 1e-8, f"{cap_err:.2e}")
    c.check("capacity = finite difference", fd_err < 1e-6, f"{fd_err:.2e}")
    c.finish()


def test_criterion_09_ising(criterion):
    c = criterion(9, "Ising magic curve and qualitative trends", 5 * 60.0)
    gs = [ISING_G0 + ISING_STEP * i for i in range(len(ISING_M2_N10))]
    rows = ising_magic_scan(10, gs, [5])
    got = np.array([r["m2_estimate"] for r in rows])
    dev = np.abs(got - np.array(ISING_M2_N10))
    c.check("n=10 curve within 2e-2", dev.max() <= 2e-2, f"max deviation {dev.max():.3e} at g={gs[int(dev.argmax())]:.4f}")
    peak = gs[int(got.argmax())]
    c.check("single peak in (0, 0.1)", 0 < peak < 0.1, f"peak at {peak:.4f}")
    crit = [r["m2_estimate"] for r in ising_magic_scan(12, [0.0], range(1, 7))]
    c.check("n=12 critical rise for |A|=3..6", all(b >= a for a, b in zip(crit[2:], crit[3:])), str(np.round(crit, 5)))
    off = [r["m2_estimate"] for r in ising_magic_scan(12, [0.2], range(1, 7))]
    inc = np.diff(off)
    # gapped chain: increments shrink geometrically, so the curve saturates
    plateau = all(inc > -1e-12) and all(b <= 0.5 * a for a, b in zip(inc, inc[1:]))
    c.check("n=12 off-critical plateau", plateau, str(np.round(inc, 5)))
    c.finish()


CLI_RUNS = [
    ["verify", "relations"],
    ["group", "reduce", "--gens", "HC"],
    ["group", "close", "--gens", "C2", "--mod-phase"],
    ["census", "--n", "4", "--format", "json"],
    ["reach", "--gens", "HC", "--state", "dicke:4,2", "--format", "graphml"],
    ["contract", "--gens", "C2", "--state", "w:3", "--format", "dot"],
    ["dicke", "cone", "5", "2"],
    ["dicke", "stars", "6", "3", "3"],
    ["ising", "--n", "10", "--cut", "5", "--steps", "7"],
]
THREADED = {"reach", "contract", "ising"}


def test_criterion_10_determinism(criterion, tmp_path, monkeypatch, capsys):
    c = criterion(10, "byte-identical outputs across threads and reruns", 10 * 60.0)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    monkeypatch.setenv("STABATLAS_CACHE", str(tmp_path / "cache"))
    for i, argv in enumerate(CLI_RUNS):
        variants = [("t1", []), ("rerun", [])]
        if argv[0] in THREADED:
            variants.append(("t4", ["--threads", "4"]))
        blobs = {}
        for tag, extra in variants:
            out = tmp_path / f"{i}-{tag}"
            code = cli_main(argv + extra + ["--out", str(out)])
            blobs[tag] = {p.name: p.read_bytes() for p in sorted(out.iterdir())} if code == 0 else code
        first = blobs["t1"]
        c.check(" ".join(argv), all(b == first for b in blobs.values()) and isinstance(first, dict), str(sorted(blobs)))
    capsys.readouterr()
    # in-process: closures and batch entropies
    clear_memo()
    a = close_subgroup(list(C2), mod_phase=True)
    clear_memo()
    b = close_subgroup(list(C2), mod_phase=True)
    c.check("closure rerun", a.words == b.words and a.to_bytes() == b.to_bytes())
    amps = orbit_states(b, range(b.order), _generic())
    e1 = batch_entropy_vectors(amps, 3, threads=1)
    e4 = batch_entropy_vectors(amps, 3, threads=4)
    c.check("batch entropies across threads", e1.tobytes() == e4.tobytes())
    c.finish()
