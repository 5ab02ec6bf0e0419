import socket
import threading
import time

import pytest
import uvicorn

from verikit.service import ServiceConfig, create_app


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="session")
def service_url():
    """A real verikit reward service on a local socket."""
    port = _free_port()
    app = create_app(ServiceConfig(workers=1))
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


RINGER = """module top_module(input ring, input vibrate_mode, output ringer, output motor);
  assign ringer = ring & ~vibrate_mode;
  assign motor = ring & vibrate_mode;
endmodule
"""
