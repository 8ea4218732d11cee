"""The two front doors: run the HTTP service and mirror it with the CLI.

Run with:
    python demos/05_service_and_cli.py

Starts the analysis service on an ephemeral port, exercises every /v1
endpoint, and verifies that the CLI emits byte-identical JSON for the
same request -- there is exactly one engine behind both doors.
"""

import json
import socket
import subprocess
import sys
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from meta_balancer.io import serialize_studies
from meta_balancer.service import create_app
from meta_balancer.simulate import simulate


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def main():
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(create_app(), host="127.0.0.1",
                                           port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            httpx.get(f"{base}/v1/health", timeout=0.2)
            break
        except httpx.HTTPError:
            time.sleep(0.05)

    dataset = serialize_studies(
        simulate("eq10", 12, seed=24, mu=0.3, beta0=1.0, phi=1.2), "csv")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "studies.csv"
        path.write_bytes(dataset)

        print(f"=== 1. Service up on {base}\n")
        print(f"  GET /v1/health -> {httpx.get(f'{base}/v1/health').json()}")

        print("\n=== 2. POST /v1/analyze (Paule-Mandel)\n")
        request = {"dataset": {"format": "csv", "path": str(path)},
                   "model": "re_additive_pm", "options": {"ci_level": 0.95}}
        resp = httpx.post(f"{base}/v1/analyze", json=request)
        doc = resp.json()
        print(f"  mu = {doc['estimates']['mu_hat']:.4f}, "
              f"tau2 = {doc['heterogeneity']['tau2']:.4f}, "
              f"pivot = {doc['balance']['pivot']:.4f}")

        print("\n=== 3. POST /v1/egger and /v1/leave-one-out\n")
        egger = httpx.post(f"{base}/v1/egger", json={
            "dataset": {"format": "csv", "path": str(path)}}).json()
        print(f"  egger: b0 = {egger['estimates']['beta0_hat']:.4f}, "
              f"mu = {egger['estimates']['mu_hat']:.4f}")
        loo = httpx.post(f"{base}/v1/leave-one-out", json={
            "dataset": {"format": "csv", "path": str(path)},
            "model": "re_additive_dl"}).json()
        print(f"  leave-one-out produced {len(loo['entries'])} refits")

        print("\n=== 4. Validation errors are 400 with machine detail\n")
        bad = httpx.post(f"{base}/v1/analyze", json={
            "dataset": {"format": "csv", "path": str(path)},
            "model": "fixed", "options": {"exclude_ids": ["no_such_study"]}})
        print(f"  status {bad.status_code}: {bad.json()['error']['message']}")

        print("\n=== 5. CLI parity: same request, same bytes\n")
        cli = subprocess.run(
            [sys.executable, "-m", "meta_balancer.cli", "analyze",
             "--input", str(path), "--model", "re_additive_pm",
             "--out", "json"],
            capture_output=True, check=True)
        print(f"  CLI bytes == service bytes: {cli.stdout == resp.content}")

    server.should_exit = True
    thread.join(timeout=5)
    print("\n  service stopped cleanly.")


if __name__ == "__main__":
    main()
