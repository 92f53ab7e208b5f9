import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bridge_worker.worker import BackendLoadError, BridgeSession, load_backend, main_loop

WORKER_CMD = [sys.executable, "-m", "bridge_worker", "--backend", "surrogate"]

PRIMARY_TESTS = os.path.abspath(
    os.path.join(os.path.dirname(__file__), "..", "..", "tests", "test_bridge.py")
)


def run_session(lines):
    stdin = io.StringIO("\n".join(lines) + "\n")
    stdout = io.StringIO()
    main_loop(stdin, stdout, load_backend("surrogate"))
    return [json.loads(line) for line in stdout.getvalue().splitlines()]


def evaluate_request(cell, species, positions):
    return json.dumps({
        "op": "evaluate",
        "cell": np.asarray(cell, dtype=float).tolist(),
        "species": list(species),
        "positions": np.asarray(positions, dtype=float).tolist(),
        "pbc": [True, True, True],
    })


class TestProtocol:
    def test_hello(self):
        replies = run_session(['{"op": "hello"}'])
        assert replies == [{"ok": True, "protocol": 1}]

    def test_evaluate_before_hello(self):
        replies = run_session([evaluate_request(np.eye(3) * 10, ["H"], [[1, 1, 1]])])
        assert replies[0] == {"ok": False, "error": "handshake required"}

    def test_malformed_line_then_recovery(self):
        replies = run_session(["not json", '{"op": "hello"}'])
        assert replies[0]["ok"] is False
        assert replies[1]["ok"] is True

    def test_shutdown(self):
        replies = run_session(['{"op": "hello"}', '{"op": "shutdown"}',
                               '{"op": "hello"}'])
        # loop ends at shutdown; the trailing hello never gets a reply
        assert len(replies) == 2
        assert replies[1] == {"ok": True}

    def test_unknown_op(self):
        replies = run_session(['{"op": "hello"}', '{"op": "teleport"}'])
        assert replies[1]["ok"] is False

    def test_wrong_protocol_rejected(self):
        replies = run_session(['{"op": "hello", "protocol": 2}'])
        assert replies[0]["ok"] is False

    def test_one_reply_per_request_line(self):
        lines = ['{"op": "hello"}'] + [
            evaluate_request(np.eye(3) * 12, ["Cu", "Cu"], [[3, 3, 3], [5, 3, 3]])
        ] * 5
        replies = run_session(lines)
        assert len(replies) == 6
        assert all(r["ok"] for r in replies)


class TestBackends:
    def test_unknown_backend(self):
        with pytest.raises(BackendLoadError):
            load_backend("quantum")

    def test_module_backend(self):
        backend = load_backend("module:catscreen.energetics.MorseSurrogate")
        session = BridgeSession(backend)
        session.handshaken = True
        reply = session.handle(json.loads(
            evaluate_request(np.eye(3) * 12, ["Cu", "Cu"], [[3, 3, 3], [5.5, 3, 3]])
        ))
        assert reply["ok"]

    def test_bad_backend_exits_nonzero_before_handshake(self):
        proc = subprocess.run(
            [sys.executable, "-m", "bridge_worker", "--backend", "module:no.such.thing"],
            input=b"", capture_output=True, timeout=60,
        )
        assert proc.returncode == 3


class TestParityAcceptance:
    def test_surrogate_parity_over_50_random_systems(self):
        """[SECONDARY] worker energies match the in-process surrogate to
        1e-8 eV over 50 random systems."""
        from catscreen.energetics import BridgeCalculator, MorseSurrogate

        local = MorseSurrogate()
        rng = np.random.default_rng(2718)
        with BridgeCalculator(WORKER_CMD, timeout=30.0) as bridge:
            for _ in range(50):
                n = int(rng.integers(2, 11))
                species = rng.choice(["Cu", "O", "H", "Ni", "Pt"], size=n).tolist()
                positions = 6.0 + rng.uniform(0.0, 5.0, size=(n, 3))
                cell = np.eye(3) * 18.0
                remote = bridge.evaluate(cell, species, positions)
                mine = local.evaluate(cell, species, positions)
                assert abs(remote.energy - mine.energy) <= 1e-8
                assert np.allclose(remote.forces, mine.forces, atol=1e-8)
        print("PASS: bridge parity over 50 random systems (<=1e-8 eV)")

    def test_crash_maps_to_bridge_unavailable_on_primary_side(self):
        from catscreen.energetics import BridgeCalculator
        from catscreen.errors import BridgeUnavailable

        calc = BridgeCalculator(WORKER_CMD, timeout=30.0)
        try:
            calc._proc.kill()
            calc._proc.wait()
            with pytest.raises(BridgeUnavailable):
                calc.evaluate(np.eye(3) * 10, ["H", "H"], [[1, 1, 1], [2.5, 1, 1]])
        finally:
            calc.close()


class TestPrimaryConformanceSuite:
    def test_primary_bridge_suite_passes_against_this_worker(self):
        """[SECONDARY] the primary side's bridge test suite runs unchanged
        against this worker via CATSCREEN_BRIDGE_CMD."""
        env = dict(os.environ)
        env["CATSCREEN_BRIDGE_CMD"] = " ".join(WORKER_CMD)
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", PRIMARY_TESTS, "-q"],
            capture_output=True, timeout=600, env=env,
            cwd=os.path.dirname(PRIMARY_TESTS),
        )
        assert proc.returncode == 0, proc.stdout.decode() + proc.stderr.decode()
        print("PASS: primary protocol-conformance suite green against bridge-worker")
