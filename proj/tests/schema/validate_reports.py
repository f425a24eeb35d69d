#!/usr/bin/env python3
"""Runs `vibeguard hook` over every corpus before and after accepting all
proposals and validates each report against the FeedbackReport schema."""

import argparse
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema


def hook(cli, workspace, event, extra=()):
    r = subprocess.run([cli, "--workspace", str(workspace), "hook", *extra], input=json.dumps(event),
                       capture_output=True, text=True, timeout=120)
    if r.returncode not in (0, 2):
        raise RuntimeError(f"hook exited {r.returncode}: {r.stderr}")
    report = json.loads(r.stdout)
    if report["exit_code"] != r.returncode:
        raise RuntimeError(f"exit_code field {report['exit_code']} != process status {r.returncode}")
    return report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schema", required=True)
    ap.add_argument("--corpus", required=True)
    args = ap.parse_args()

    validator = jsonschema.Draft202012Validator(json.loads(pathlib.Path(args.schema).read_text()))
    failures = 0
    checked = 0
    for corpus in sorted(p for p in pathlib.Path(args.corpus).iterdir() if p.is_dir()):
        with tempfile.TemporaryDirectory() as tmp:
            ws = pathlib.Path(tmp) / corpus.name
            shutil.copytree(corpus, ws)
            (ws / ".vibeguard").mkdir()
            (ws / ".vibeguard" / "config.json").write_text('{"oracle_cmd": "builtin"}')
            changed = sorted(p.name for p in corpus.iterdir() if p.suffix in (".ts", ".tsx"))
            event = {"event": "post-edit", "changed": changed, "session": "schema"}

            reports = [("pre", hook(args.cli, ws, event))]
            for p in reports[0][1]["proposed"]:
                subprocess.run([args.cli, "--workspace", str(ws), "decide", p["id"], "accepted"], check=True,
                               capture_output=True)
            reports.append(("accepted", hook(args.cli, ws, event)))
            reports.append(("auto-apply", hook(args.cli, ws, {"event": "pre-commit"}, ["--auto-apply"])))
            reports.append(("manual", hook(args.cli, ws, {"event": "manual"})))

            for label, report in reports:
                checked += 1
                errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
                status = "ok" if not errors else "INVALID"
                print(f"{corpus.name:14} {label:10} exit={report['exit_code']} {status}")
                for e in errors[:5]:
                    print(f"    {list(e.path)}: {e.message}")
                failures += bool(errors)
    print(f"{checked - failures}/{checked} reports valid")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
