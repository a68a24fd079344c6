import socket
import threading
import time
from contextlib import contextmanager

import pytest
import uvicorn

from linkreplay.model import Scenario, ScenarioRow


def make_scenario(n_rows=1200, delta_ms=50, path_id="path0", *,
                  base_tput_bps=5_000_000.0, base_delay_ms=30.0,
                  base_jitter_ms=2.0, base_loss=0.0,
                  dip_start_ms=None, dip_len_ms=0,
                  dip_tput_bps=500_000.0, dip_delay_ms=120.0,
                  dip_jitter_ms=8.0,
                  lat0=35.0, lon0=139.0):
    """Synthetic scenario on a straight route, optionally with one dip."""
    rows = []
    for i in range(n_rows):
        t = i * delta_ms
        in_dip = (dip_start_ms is not None
                  and dip_start_ms <= t < dip_start_ms + dip_len_ms)
        rows.append(ScenarioRow(
            t_ms=t,
            lat_deg=lat0 + i * 1e-6,
            lon_deg=lon0 + i * 1e-6,
            throughput_bps=dip_tput_bps if in_dip else base_tput_bps,
            delay_ms=dip_delay_ms if in_dip else base_delay_ms,
            jitter_ms=dip_jitter_ms if in_dip else base_jitter_ms,
            loss_rate=base_loss,
        ))
    return Scenario(path_id=path_id, delta_ms=delta_ms, rows=tuple(rows))


@pytest.fixture
def dip_scenario():
    """60 s at 50 ms grid, 5 Mbps/30 ms/2 ms baseline, 2 s dip at t=10 s."""
    return make_scenario(n_rows=1200, dip_start_ms=10_000, dip_len_ms=2_000)


@contextmanager
def live_server(app):
    """Serve an ASGI app on an ephemeral port in a background thread.

    The in-process TestClient buffers streaming bodies, so anything that
    exercises live NDJSON streams goes through a real server instead.
    """
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning", lifespan="off"))
    thread = threading.Thread(target=server.run, kwargs={"sockets": [sock]},
                              daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started and time.monotonic() < deadline:
        time.sleep(0.01)
    if not server.started:
        raise RuntimeError("uvicorn did not start in time")
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5.0)


@pytest.fixture
def flat_scenario():
    return make_scenario(n_rows=1200)
