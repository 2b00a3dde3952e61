"""End-to-end over the wire: the client CLI (a separate package) runs a full
scenario in remote mode against a live sidecar server. The only coupling is
the HTTP protocol and the scenario/trace file formats."""

import json
import os
import socket
import subprocess
import sys
import threading
import time

import pytest
import requests
import uvicorn

from cogito_sidecar.app import create_app

from conftest import REPO, stub_registry


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def live_server():
    port = free_port()
    config = uvicorn.Config(
        create_app(stub_registry()), host="127.0.0.1", port=port, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            if requests.get(base + "/v1/health", timeout=1).status_code == 200:
                break
        except requests.exceptions.ConnectionError:
            time.sleep(0.05)
    else:
        raise RuntimeError("sidecar server did not come up")
    yield base
    server.should_exit = True
    thread.join(timeout=5)


def test_health_over_the_wire(live_server):
    body = requests.get(live_server + "/v1/health", timeout=5).json()
    assert body["status"] == "ok"


def test_client_cli_runs_a_scenario_remotely(live_server, tmp_path):
    out = tmp_path / "out"
    env = dict(os.environ)
    env["COGITO_BACKEND_URL"] = live_server
    env["COGITO_TIMEOUT_MS"] = "10000"
    proc = subprocess.run(
        [
            sys.executable, "-m", "cogito.cli",
            "--scenario", str(REPO / "scenarios" / "whatif.json"),
            "--backend", "remote",
            "--out-dir", str(out),
        ],
        env=env,
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    trace = json.loads((out / "trace.json").read_text())
    assert trace["backend_mode"] == "remote"
    assert len(trace["cycles"]) == 2
    # the stub generator answers every prompt, so each cycle schedules one
    # action and each what-if injection contributes one revision
    cycle0 = trace["cycles"][0]
    assert len(cycle0["actions"]) == 1
    assert len(cycle0["revisions"]) == 2
    assert (out / "cycle0_action0.pgm").exists()
