import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsqc.bayesnet import BayesNet, Cpt, NetSemanticError, NodeSpec, joint_prob, parse_probs
from gibbsqc.circuit import Control, Gate, count_elementary, validate_circuit
from gibbsqc.generator import (
    PRERUN_FILES,
    GenerationError,
    GenParams,
    ZeroProbabilityStart,
    afga_schedule,
    format_nits,
    gamma0,
    generate_circuit,
    parse_nits,
    ry_angle,
    uniform_probs,
    v_standin,
    write_outputs,
    write_prerun,
)
from gibbsqc.nitcodes import build_layout, nit_blanket
from gibbsqc.oracle import count_ops_by_expansion, enumerate_joint
from gibbsqc.text_formats import check_correspondence, parse_english, parse_log

from randgen import random_net

THREE_BLANKETS = "# A B C\n# B A C\n# C A B\n"
THREE_NITS = (
    "# 0\nowner node A\nblanket nit 1 2 3\n"
    "# 1\nowner node A\nblanket nit 0 2 3\n"
    "# 2\nowner node B\nblanket nit 0 1 3\n"
    "# 3\nowner node C\nblanket nit 0 1 2\n"
)


def params(start, **kw):
    base = dict(probe_bits_a=2, pe_steps_c=1, max_grover_steps=3,
                gamma_tol_degs=1.0, delta_lambda_degs=30.0, start=start)
    return GenParams(**(base | kw))


def copy_net(prior=(0.3, 0.7), table=((1.0, 0.0), (0.0, 1.0))):
    nodes = (NodeSpec("X", (), ("x0", "x1")), NodeSpec("Y", ("X",), ("y0", "y1")))
    rows = {(s, (x,)): table[x][s] for x in range(2) for s in range(2) if table[x][s]}
    cpts = (Cpt("X", {(0, ()): prior[0], (1, ()): prior[1]}), Cpt("Y", rows))
    return BayesNet(nodes, cpts)


class TestPrerun:
    def test_three_nodes(self, io_folder):
        folder = io_folder("3nodes")
        (folder / "probs.txt").unlink()  # pre-run must not need it
        paths = write_prerun(folder)
        assert [p.name for p in paths] == list(PRERUN_FILES)
        assert (folder / "blankets.txt").read_text() == THREE_BLANKETS
        assert (folder / "nits.txt").read_text() == THREE_NITS

    def test_uniform_F_by_hand(self, net3):
        text = uniform_probs(net3, "F")
        lines = text.splitlines()
        third = repr(1 / 3)
        assert lines[:4] == ["# A", f"a1 {third}", f"a2 {third}", f"a3 {third}"]
        assert lines[5:9] == ["b1 a1 c1 0.5", "b2 a1 c1 0.5", "b1 a1 c2 0.5", "b2 a1 c2 0.5"]

    def test_uniform_T_by_hand(self, net3):
        lines = uniform_probs(net3, "T").splitlines()
        assert lines[5:8] == ["b1 a1 c1 0.5", "b1 a1 c2 0.5", "b1 a2 c1 0.5"]

    def test_bad_variant(self, net3):
        with pytest.raises(ValueError):
            uniform_probs(net3, "X")

    def test_no_clobber(self, io_folder):
        folder = io_folder("2nodes")
        write_prerun(folder)
        with pytest.raises(FileExistsError):
            write_prerun(folder, no_clobber=True)

    def test_cycle_rejected(self, tmp_path):
        (tmp_path / "parents.txt").write_text("# A B\n# B A\n")
        (tmp_path / "states.txt").write_text("# A a0 a1\n# B b0 b1\n")
        with pytest.raises(NetSemanticError):
            write_prerun(tmp_path)

    def test_nits_parse_back(self, net3):
        lay = build_layout(net3)
        parsed = parse_nits(format_nits(net3, lay))
        assert parsed[0] == ("A", [1, 2, 3])
        assert len(parsed) == 4

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from("FT"))
    def test_uniform_reparses(self, seed, variant):
        net = random_net(random.Random(seed))
        skel = BayesNet(net.nodes)
        cpts = parse_probs(uniform_probs(net, variant), skel)
        for node, cpt in zip(net.nodes, cpts):
            assert all(p == 1.0 / node.n_states for p in cpt.rows.values())


class TestAngles:
    @pytest.mark.parametrize("p,g", [(1.0, 0.0), (0.5, 90.0), (0.25, 120.0), (0.75, 60.0)])
    def test_gamma0_values(self, p, g):
        assert gamma0(p) == pytest.approx(g, abs=1e-9)

    def test_gamma0_zero(self):
        with pytest.raises(ZeroProbabilityStart):
            gamma0(0.0)

    @pytest.mark.parametrize("p", [-0.1, 1.5, math.nan])
    def test_gamma0_range(self, p):
        with pytest.raises(ValueError):
            gamma0(p)

    def test_schedule_by_hand(self):
        # cos^2(45 deg) = 1/2, so each step halves gamma
        assert afga_schedule(120.0, 90.0, 10.0, 100) == pytest.approx([120.0, 60.0, 30.0, 15.0])

    def test_schedule_cap(self):
        assert len(afga_schedule(120.0, 1.0, 1e-6, 7)) == 7

    def test_schedule_needs_decrease(self):
        with pytest.raises(GenerationError):
            afga_schedule(10.0, 10.0, 1.0, 5, policy=lambda g, d: g)

    @given(st.floats(1e-3, 180), st.floats(0.5, 180), st.floats(1e-3, 50), st.integers(1, 200))
    def test_schedule_properties(self, g0, dl, tol, cap):
        s = afga_schedule(g0, dl, tol, cap)
        assert len(s) <= cap
        assert all(x >= tol for x in s)
        assert all(b < a for a, b in zip(s, s[1:]))

    @pytest.mark.parametrize("q,angle", [(1.0, 0.0), (0.0, 180.0), (0.5, 90.0)])
    def test_ry_angle(self, q, angle):
        assert ry_angle(q) == pytest.approx(angle, abs=1e-12)


class TestParams:
    @pytest.mark.parametrize("kw", [
        dict(probe_bits_a=0), dict(pe_steps_c=0), dict(max_grover_steps=0),
        dict(gamma_tol_degs=0.0), dict(delta_lambda_degs=0.0), dict(delta_lambda_degs=181.0),
    ])
    def test_rejects(self, kw):
        with pytest.raises(GenerationError):
            params({}, **kw)


class TestVStandin:
    def test_deterministic_copy(self):
        net = copy_net()
        gates = v_standin(net, build_layout(net), 0)
        assert gates[1] == Gate("MP_Y", (1,), (0.0, 180.0), mux_controls=((0, 0),))
        assert gates[0] == Gate("MP_Y", (0,), (0.0, 180.0), mux_controls=((1, 0),))
        assert all(g.tag == "V" for g in gates)

    def test_noisy_by_hand(self):
        net = copy_net(table=((0.9, 0.1), (0.2, 0.8)))
        x_gate = v_standin(net, build_layout(net), 0)[0]
        # P(X=0 | Y=0) = .3*.9 / (.3*.9 + .7*.2)
        q = 0.27 / (0.27 + 0.14)
        assert x_gate.angles[0] == pytest.approx(2 * math.degrees(math.acos(math.sqrt(q))), abs=1e-9)

    def test_register_offset(self, net3):
        gates = v_standin(net3, build_layout(net3), 1)
        assert gates[0].targets == (4,)
        assert gates[0].mux_controls == ((7, 2), (6, 1), (5, 0))

    def test_isolated_nit_gets_roty(self):
        net = BayesNet((NodeSpec("X", (), ("x0", "x1")),), (Cpt("X", {(0, ()): 0.25, (1, ()): 0.75}),))
        (g,) = v_standin(net, build_layout(net), 0)
        assert g.kind == "ROTY" and g.angles == (pytest.approx(120.0),)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_controls_are_blanket_and_angles_match_oracle(self, seed):
        net = random_net(random.Random(seed), max_nodes=4, positive=False)
        lay = build_layout(net)
        table = [(lay.encode(x), p) for x, p in enumerate_joint(net)]
        for nit, g in enumerate(v_standin(net, lay, 0)):
            blanket = nit_blanket(net, lay, nit)
            assert {b for b, _ in g.mux_controls} == blanket
            assert g.problems(lay.nb) == []
            by_name = {k: b for b, k in g.mux_controls}
            for cfg, angle in enumerate(g.angles):
                sel = [(bits, p) for bits, p in table
                       if all(bits[by_name[k]] == (cfg >> k) & 1 for k in by_name)]
                tot = sum(p for _, p in sel)
                if tot == 0:
                    assert angle == 0.0
                    continue
                q0 = sum(p for bits, p in sel if bits[nit] == 0) / tot
                assert math.cos(math.radians(angle) / 2) ** 2 == pytest.approx(q0, abs=1e-9)


class TestGenerate:
    def test_three_nodes_counts(self, net3):
        lay = build_layout(net3)
        start = {"A": 0, "B": 0, "C": 0}
        c, d = generate_circuit(net3, lay, params(start))
        assert d.qubit_count == 2 * 4 + 2 * 1 == c.qubit_count
        assert d.p_start == joint_prob(net3, start)
        assert d.gamma0_degs == pytest.approx(math.degrees(2 * math.acos(math.sqrt(d.p_start))))
        assert d.elementary_op_count == count_ops_by_expansion(c) == count_elementary(c)
        assert validate_circuit(c) == []
        assert sum(g.kind == "PHAS" for g in c) == 2 * d.grover_steps_used

    def test_start_preparation(self, net3):
        lay = build_layout(net3)
        c, _ = generate_circuit(net3, lay, params({"A": 2, "B": 1, "C": 0}))
        # a3 = 10, b2 = 1: nits 1 and 2 flipped
        assert c.ops[:2] == [Gate("SIGX", (1,)), Gate("SIGX", (2,))]
        phas = next(g for g in c if g.kind == "PHAS")
        assert phas.controls == (Control(0, False), Control(1, True), Control(2, True), Control(3, False))

    def test_zero_probability_start(self, net3):
        with pytest.raises(ZeroProbabilityStart):
            generate_circuit(net3, build_layout(net3), params({"A": 1, "B": 0, "C": 1}))

    def test_no_nits(self):
        net = BayesNet((NodeSpec("X", (), ("x",)),), (Cpt("X", {(0, ()): 1.0}),))
        with pytest.raises(GenerationError):
            generate_circuit(net, build_layout(net), params({"X": 0}))

    def test_omit_v_drops_only_v(self, net3):
        lay = build_layout(net3)
        full, _ = generate_circuit(net3, lay, params({"A": 0, "B": 0, "C": 0}))
        slim, d = generate_circuit(net3, lay, params({"A": 0, "B": 0, "C": 0}, omit_v=True))
        assert [g for g in full if g.tag != "V" and not g.is_loop_marker] == list(slim)
        assert d.elementary_op_count == len(slim)

    def test_write_outputs(self, io_folder, nets):
        folder = io_folder("3nodes")
        c, d, paths = write_outputs(folder, nets["3nodes"], params({"A": 0, "B": 0, "C": 0}))
        eng, pic = (folder / "quibbs_eng.txt").read_text(), (folder / "quibbs_pic.txt").read_text()
        assert parse_english(eng, c.qubit_count) == c
        assert check_correspondence(eng, pic) == []
        log = parse_log((folder / "quibbs_log.txt").read_text())
        assert log["Number of qubits"] == "10"
        assert log["Number of elementary operations"] == str(d.elementary_op_count)
        assert log["Prob. of starting state"] == repr(d.p_start)
        assert log["Omit V gates"] == "OFF"
        assert "    A = a1 (00) 0" in (folder / "quibbs_log.txt").read_text()
        with pytest.raises(FileExistsError):
            write_outputs(folder, nets["3nodes"], params({"A": 0, "B": 0, "C": 0}), no_clobber=True)
