"""
Serving the index over HTTP
===========================

The service is read-only over one index. It runs in-process here on a
free port; `trueorigin serve --gazetteer FILE` does the same from a shell.
"""

import socket
import threading
import time

import requests
import uvicorn

from trueorigin import OracleClassifier, PipelineDeps, build_index, load_gazetteer
from trueorigin.app.service import create_app
from trueorigin.lem import GazetteerExtractor
from _data import GAZETTEER, TWEETS

index = build_index(load_gazetteer(GAZETTEER))
app = create_app(PipelineDeps(index, GazetteerExtractor(index),
                              OracleClassifier.from_jsonl(TWEETS)))

sock = socket.socket()
sock.bind(("127.0.0.1", 0))
base = f"http://127.0.0.1:{sock.getsockname()[1]}"
server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True).start()
while not server.started:
    time.sleep(0.05)

print(requests.get(f"{base}/health").json())
print(requests.get(f"{base}/search", params={"q": "melbourne uni", "limit": 1}).text)
print(requests.get(f"{base}/reverse", params={"lon": 85.324, "lat": 27.7172}).json()
      ["features"][0]["properties"]["city"])
r = requests.post(f"{base}/geotag", json={"id": "d07", "text": "Run along the Riverwalk "
                                          "in our beautiful city of Chicago"})
print(r.status_code, r.json()["disposition"], r.json()["conclusive"])
print(requests.get(f"{base}/reverse", params={"lon": 0, "lat": 95}).status_code)

server.should_exit = True
