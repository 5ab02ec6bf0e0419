import json

import httpx
import pytest

from verikit.corpus import load_corpus, load_unsupported
from verikit.curation.llm import ChatClient, LlmEndpoint

RINGER = """module top_module(input ring, input vibrate_mode, output ringer, output motor);
  assign ringer = ring & ~vibrate_mode;
  assign motor = ring & vibrate_mode;
endmodule
"""

DECADE = """module top_module(input clk, input reset, output reg [3:0] q);
  always @(posedge clk)
    if (reset || q == 10)
      q <= 1;
    else
      q <= q + 1;
endmodule
"""


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def unsupported_corpus():
    return load_unsupported()


@pytest.fixture
def ringer_src():
    return RINGER


@pytest.fixture
def decade_src():
    return DECADE


def make_mock_client(reply_fn) -> ChatClient:
    """Chat client whose completions come from reply_fn(messages) -> str."""

    def handler(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content)
        content = reply_fn(payload["messages"])
        return httpx.Response(
            200, json={"choices": [{"message": {"content": content}}]}
        )

    return ChatClient(LlmEndpoint(base_url="http://mock", model="mock"),
                      transport=httpx.MockTransport(handler))
