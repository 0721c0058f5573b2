"""Drives a live dorplan-server and validates every JSON response against the
component schemas of docs/openapi.json.

usage: api_schema_check.py SERVER_BINARY OPENAPI_JSON FIXTURES_DIR
"""

import json
import socket
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

import jsonschema

server_bin, openapi_path, fixtures = sys.argv[1:4]
with open(openapi_path, encoding="utf-8") as f:
    doc = json.load(f)


def schema_for(name):
    root = dict(doc)
    root["$ref"] = "#/components/schemas/" + name
    return jsonschema.Draft202012Validator(root)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


port = free_port()
base = f"http://127.0.0.1:{port}"
failures = []


def call(method, path, body=None):
    data = body.encode() if isinstance(body, str) else (json.dumps(body).encode() if body is not None else None)
    req = urllib.request.Request(base + path, data=data, method=method, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=120) as r:
            return r.status, r.headers.get("Content-Type", ""), r.read().decode()
    except urllib.error.HTTPError as e:
        return e.code, e.headers.get("Content-Type", ""), e.read().decode()


def check(label, method, path, body, status, schema):
    code, ctype, text = call(method, path, body)
    if code != status:
        failures.append(f"{label}: status {code}, expected {status}: {text[:200]}")
        return None
    if schema is None:
        return text
    if not ctype.startswith("application/json"):
        failures.append(f"{label}: content type {ctype}")
        return None
    payload = json.loads(text)
    target = {"type": "array", "items": {"$ref": "#/components/schemas/" + schema[2:]}} if schema.startswith("[]") else None
    if target:
        root = dict(doc)
        root.update(target)
        errors = list(jsonschema.Draft202012Validator(root).iter_errors(payload))
    else:
        errors = list(schema_for(schema).iter_errors(payload))
    for e in errors[:3]:
        failures.append(f"{label}: {schema}: {e.message} at {list(e.absolute_path)}")
    return payload


def read(name):
    with open(f"{fixtures}/{name}", encoding="utf-8") as f:
        return f.read()


with tempfile.TemporaryDirectory() as data_dir:
    proc = subprocess.Popen([server_bin, "--port", str(port), "--data-dir", data_dir, "--openapi", openapi_path],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        for _ in range(100):
            try:
                if call("GET", "/health")[0] == 200:
                    break
            except OSError:
                time.sleep(0.05)
        else:
            sys.exit("server did not start")

        check("bad json", "POST", "/sessions", "{", 400, "Error")
        check("missing criteria", "POST", "/sessions", json.dumps({"periods": 2, "facilities": []}), 422, "Error")
        created = check("create", "POST", "/sessions", read("ecovillage.json"), 201, None)
        if created is None:
            sys.exit("\n".join(failures))
        sid = json.loads(created)["id"]
        s = f"/sessions/{sid}"
        check("list", "GET", "/sessions", None, 200, None)
        check("view", "GET", s, None, 200, "SessionView")
        check("unknown", "GET", "/sessions/zzz", None, 404, "Error")

        code, _, text = call("POST", s + "/generate", read("ecovillage_grid.json"))
        if code == 202:
            ticket = json.loads(text)
            jsonschema.Draft202012Validator(dict(doc, **{"$ref": "#/components/schemas/JobTicket"})).validate(ticket)
            while True:
                state = check("job", "GET", ticket["poll"], None, 200, "JobState")
                if state is None or state["state"] != "running":
                    break
                time.sleep(0.2)
        elif code != 200:
            failures.append(f"generate: status {code}")
        it = check("iteration", "GET", s + "/iterations/1", None, 200, "IterationView")

        with open(f"{fixtures}/case_study/script.json", encoding="utf-8") as f:
            select = json.load(f)[2]["select"]
        check("curate", "POST", s + "/curate", {"iteration": 1, "select": select}, 200, "IterationView")
        for name, file in (("R50", "r50.json"), ("R100", "r100.json")):
            check("rank " + name, "POST", s + "/rankings", {"iteration": 1, "name": name, "ranking": json.loads(read(file))},
                  201, "ScoreTable")
        check("merge", "POST", s + "/rankings", {"name": "RTot", "merge": {"lower": "R50", "upper": "R100", "bridge": 7}},
              201, "ScoreTable")
        check("ghost", "POST", s + "/rankings", {"name": "Q", "ranking": {"classes": [["ghost"]]}}, 422, "Error")
        check("fit", "POST", s + "/fits", {"name": "wRTot", "ranking": "RTot"}, 201, "RegressionResult")
        check("events", "GET", s + "/events", None, 200, "[]Event")
        csv = check("csv", "GET", s + "/iterations/1/plans.csv", None, 200, None)
        if csv is not None and not csv.startswith("plan,RES-WWO"):
            failures.append("csv: unexpected header")
        check("comment", "POST", s + "/comments", {"text": "ok"}, 201, None)
        check("accept unknown", "POST", s + "/accept", {"plan": "x99"}, 404, "Error")
        check("accept", "POST", s + "/accept", {"plan": "x1"}, 200, "SessionView")
        check("after accept", "POST", s + "/comments", {"text": "late"}, 409, "Error")
        check("no job", "GET", "/jobs/none", None, 404, "Error")
        check("wrong method", "DELETE", "/sessions", None, 405, "Error")
    finally:
        proc.terminate()
        proc.wait(timeout=10)

if failures:
    print("\n".join(failures))
    sys.exit(1)
print("every response matches its schema")
