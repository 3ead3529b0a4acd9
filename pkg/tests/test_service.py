import numpy as np
import pytest
from fastapi.testclient import TestClient

from safestop.runner import RunConfig
from safestop.service import create_app

START = np.array([1.0, 4.0, 1.5])
PILLAR = np.array([4.0, 5.25, 1.5])


def make_client(monitoring_enabled=True):
    cfg = RunConfig(scenario_kind="arena", monitoring_enabled=monitoring_enabled)
    app = create_app(cfg, paced=False)
    return TestClient(app)


def toward_pillar(position):
    d = PILLAR - np.asarray(position)
    return (d / np.linalg.norm(d) * 2.0).tolist()


def command_msg(seq, velocity):
    return {"proto": 1, "seq": seq, "type": "command",
            "command": {"velocity": velocity, "yaw_rate": 0.0},
            "timestamp": 0.0}


def drive_until(ws, predicate, max_messages=3000, seq_start=0):
    """Keep commanding toward the pillar; return (events, snapshot) on hit."""
    seq = seq_start
    events = []
    snapshot = None
    for i in range(max_messages):
        if snapshot is not None:
            seq += 1
            ws.send_json(command_msg(seq, toward_pillar(
                snapshot["state"]["position"])))
        msg = ws.receive_json()
        if msg["type"] == "event":
            events.append(msg)
        elif msg["type"] == "snapshot":
            snapshot = msg
        if snapshot is not None and predicate(events, snapshot):
            return events, snapshot
    raise AssertionError(
        f"condition not reached after {max_messages} messages; "
        f"events={[e['event'] for e in events]}")


def test_snapshot_shape_and_greeting():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            snap = ws.receive_json()
            assert snap["proto"] == 1
            assert snap["type"] == "snapshot"
            assert snap["mode"] == "TELEOP"
            assert len(snap["nearest_obstacles"]) <= 50
            np.testing.assert_allclose(snap["state"]["position"], START)


def test_sequence_numbers_strictly_increase():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            last = -1
            for _ in range(20):
                msg = ws.receive_json()
                assert msg["seq"] > last
                last = msg["seq"]


def test_stop_event_and_rest_with_monitoring():
    with make_client(monitoring_enabled=True) as client:
        with client.websocket_connect("/ws") as ws:
            def stopped(events, snap):
                has_stop = any(e["event"] == "stop" for e in events)
                at_rest = np.linalg.norm(snap["state"]["velocity"]) < 1e-3
                return has_stop and at_rest and snap["mode"] != "TELEOP"

            events, snap = drive_until(ws, stopped)
            kinds = [e["event"] for e in events]
            assert "stop" in kinds
            assert "collision" not in kinds
            assert np.linalg.norm(snap["state"]["velocity"]) < 1e-3


def test_stop_snapshot_carries_trajectory():
    with make_client(monitoring_enabled=True) as client:
        with client.websocket_connect("/ws") as ws:
            def stopping(events, snap):
                return snap["mode"] == "STOPPING" and snap["stop_trajectory"]

            _, snap = drive_until(ws, stopping)
            samples = snap["stop_trajectory"]
            assert len(samples) >= 2
            assert all(len(s) == 4 for s in samples)  # t, x, y, z
            assert samples[0][0] == pytest.approx(0.0)


def test_collision_event_without_monitoring():
    with make_client(monitoring_enabled=False) as client:
        with client.websocket_connect("/ws") as ws:
            def collided(events, snap):
                return any(e["event"] == "collision" for e in events)

            events, _ = drive_until(ws, collided)
            assert all(e["event"] != "stop" for e in events)


def test_toggle_monitoring_then_collide():
    with make_client(monitoring_enabled=True) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_json({"proto": 1, "seq": 1, "type": "toggle_monitoring"})

            def off(events, snap):
                return snap["monitoring_enabled"] is False

            drive_until(ws, off, max_messages=50, seq_start=1)

            def collided(events, snap):
                return any(e["event"] == "collision" for e in events)

            events, _ = drive_until(ws, collided, seq_start=100)
            assert all(e["event"] != "stop" for e in events)


def test_reset_restores_start():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            def moved(events, snap):
                return snap["state"]["position"][0] > 1.5

            drive_until(ws, moved)
            ws.send_json({"proto": 1, "seq": 10_000, "type": "reset"})

            def back(events, snap):
                return np.linalg.norm(
                    np.asarray(snap["state"]["position"]) - START) < 0.2

            _, snap = drive_until(ws, back, max_messages=200)
            assert snap["mode"] == "TELEOP"


def test_command_hold_decays_to_zero():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            snap = ws.receive_json()
            # one burst of commands, then silence
            ws.send_json(command_msg(1, [0.0, -1.0, 0.0]))
            deadline = None
            for _ in range(2000):
                msg = ws.receive_json()
                if msg["type"] != "snapshot":
                    continue
                speed = float(np.linalg.norm(msg["state"]["velocity"]))
                if deadline is None and speed > 0.1:
                    deadline = msg["t"] + 3.0
                if deadline is not None and msg["t"] > deadline:
                    assert speed < 0.05
                    return
            pytest.fail("vehicle never spun up / settled")


def test_protocol_violation_closes_connection():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_json({"proto": 1, "seq": 1, "type": "teleport"})
            msg = ws.receive_json()
            while msg["type"] in ("snapshot", "event"):
                msg = ws.receive_json()
            assert msg["type"] == "error"
            assert "unknown message type" in msg["notice"]


def test_stale_sequence_rejected():
    with make_client() as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_json(command_msg(5, [0.0, 0.0, 0.0]))
            ws.send_json(command_msg(5, [0.0, 0.0, 0.0]))
            msg = ws.receive_json()
            while msg["type"] in ("snapshot", "event"):
                msg = ws.receive_json()
            assert msg["type"] == "error"
            assert "sequence" in msg["notice"]
