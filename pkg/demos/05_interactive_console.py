"""
Steering the regulator by hand
==============================

Starts the control API in-process, opens an interactive session that pauses
every quarter for a regulator decision, and posts a different announcement
each quarter to watch the market react.  The browser console in frontend/
drives exactly these endpoints.
"""

import threading

import requests

from pharmsim.server import make_server

server = make_server(port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print("API up at", base, "->", requests.get(f"{base}/health").json())

session = requests.post(f"{base}/sessions", json={
    "mode": "human_fda",
    "config": {
        "n": 2, "horizon": 4, "disruption_prob": 0.0, "seed": 3,
        "forced": {"deltas": {"0": 0.56}, "duration": 4},
    },
}).json()
sid = session["id"]
print("session", sid, "status:", session["status"])

# Quarter by quarter: we are the regulator.  Watch how a strong early alert
# makes the buyer stockpile and the manufacturers expand.
decisions = [
    {"announce": True, "severity": "high_alert",
     "text": "Severe supply shortfall expected; expand production now.",
     "confidence": "high", "rationale": "forced disruption reported"},
    {"announce": True, "severity": "elevated",
     "text": "Shortage persists; expansion is underway.",
     "confidence": "moderate", "rationale": "watching recovery"},
    {"announce": False, "severity": "none", "text": "",
     "confidence": "moderate", "rationale": "supply recovering"},
    {"announce": False, "severity": "none", "text": "",
     "confidence": "high", "rationale": "market stable"},
]
for decision in decisions:
    reply = requests.post(f"{base}/sessions/{sid}/fda-decision", json=decision).json()
    record = reply["record"]
    print(f"quarter {record['period']}: severity={decision['severity'] or 'none':<10} "
          f"order={record['total_demand']:.3f} supply={record['total_supply']:.3f} "
          f"shortage={record['shortage']:.4f}")

print("final status:", requests.get(f"{base}/sessions/{sid}").json()["status"])
print("\nfull trajectory (JSON lines):")
print(requests.get(f"{base}/sessions/{sid}/trajectory").text)
server.shutdown()
