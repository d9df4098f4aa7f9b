"""Operator command line: validate documents, run scenarios, replay the
speed experiment, serve a live simulation for the approval console, and
print the attack coverage matrix.

Exit codes: 0 success, 1 validation failure, 2 scenario/criteria failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional

import yaml

from . import documents
from .predicate import PredicateSyntaxError
from .httpapi import ApiServer, BrokerFacade
from .model import validate_descriptor
from .primitives import EnforcementFlags
from .sim import coverage as coverage_mod
from .sim import experiment as experiment_mod
from .sim.backends import CONTEXT_BLIND, CONTEXT_SENSITIVE_NOISY
from .sim.harness import Runner, ScenarioInvalidError
from .sim.scenario import load_scenario, validate_scenario

EX_OK = 0
EX_VALIDATION = 1
EX_SCENARIO = 2
EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit(2)
        self.print_help(sys.stderr)
        sys.stderr.write(f"\nerror: {message}\n")
        raise SystemExit(EX_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ztpm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a descriptor or scenario document")
    p_validate.add_argument("path")

    p_run = sub.add_parser("run", help="run a scenario document")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--enforce", default=None, help="all | none | comma-separated primitive ids")
    p_run.add_argument("--approver", default=None, choices=["approve-all", "deny-all", "pit-le-3"])
    p_run.add_argument("--out", default=None, help="directory for the audit log and report")

    p_exp = sub.add_parser("experiment", help="replay the actuation speed experiment")
    p_exp.add_argument("--backend", choices=["blind", "sensitive"], required=True)
    p_exp.add_argument("--seed", type=int, default=1)
    p_exp.add_argument("--tea4", choices=["on", "off"], default="off")

    p_serve = sub.add_parser("serve", help="run a scenario paced in real time with the approval API")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--tick-rate", type=float, default=2.0, help="ticks per second")
    p_serve.add_argument("--linger", action="store_true",
                         help="keep the API up after the run finishes")

    p_cov = sub.add_parser("coverage", help="run the attack coverage suite and print the matrix")
    p_cov.add_argument("--seed", type=int, default=7)
    p_cov.add_argument("--out", default=None, help="write the matrix as CSV here")

    return parser


def _cmd_validate(args) -> int:
    data = documents.load_yaml(args.path)
    if isinstance(data, dict) and ("operator_script" in data or "attacks" in data):
        from .sim.scenario import scenario_from_plain

        scenario = scenario_from_plain(data, base_dir=os.path.dirname(args.path) or ".")
        problems = validate_scenario(scenario)
    else:
        descriptor = documents.descriptor_from_plain(data)
        problems = validate_descriptor(descriptor)
        if "chains" in (data or {}):
            from .delegation import validate_chain

            for raw in data["chains"]:
                chain = documents.chain_from_plain(raw)
                problems.extend(v.message for v in validate_chain(chain, descriptor))
    if problems:
        for problem in problems:
            print(f"violation: {problem}")
        return EX_VALIDATION
    print("ok")
    return EX_OK


def _load_run_scenario(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if getattr(args, "enforce", None):
        scenario = scenario.with_flags(
            EnforcementFlags.parse(args.enforce), scenario.core_enforcement
        )
    if getattr(args, "approver", None):
        from dataclasses import replace

        scenario = replace(scenario, approver=args.approver)
    return scenario


def _cmd_run(args) -> int:
    sink = None
    try:
        scenario = _load_run_scenario(args)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            sink = open(os.path.join(args.out, "audit.jsonl"), "w", encoding="utf-8")
        runner = Runner(scenario, audit_sink=sink)
        report = runner.run()
    except ScenarioInvalidError as exc:
        print(f"scenario invalid: {exc}", file=sys.stderr)
        return EX_SCENARIO
    finally:
        if sink is not None:
            sink.close()
    print(f"scenario {report.scenario_name} finished after {report.ticks} ticks")
    print(f"executed commands: {len(report.executed)}")
    decisions = report.audit.of_kind("decision")
    for outcome in ("PERMIT", "DEFER", "DENY"):
        count = sum(1 for d in decisions if d["decision"] == outcome)
        print(f"decisions {outcome}: {count}")
    if report.attacks_attempted:
        for cls in sorted(report.attacks_attempted):
            result = "SUCCEEDED" if report.success_ticks.get(cls) else "did not succeed"
            print(f"attack {cls}: {result}")
    if args.out:
        summary = {
            "scenario": report.scenario_name,
            "seed": report.seed,
            "ticks": report.ticks,
            "executed": len(report.executed),
            "attacks_attempted": sorted(report.attacks_attempted),
            "success_ticks": report.success_ticks,
            "final_trust": report.final_trust,
            "contracted_agents": report.contracted_agents,
            "quarantined_sessions": report.quarantined_sessions,
        }
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}/audit.jsonl and {args.out}/report.json")
    return EX_OK


def _cmd_experiment(args) -> int:
    backend = CONTEXT_BLIND if args.backend == "blind" else CONTEXT_SENSITIVE_NOISY
    result = experiment_mod.replay_speed_experiment(
        backend, seed=args.seed, tea4=(args.tea4 == "on")
    )
    print(result.table())
    if args.tea4 == "on":
        total_denied = sum(s.denied_over_bound for s in result.stats.values())
        total_over = sum(s.executed_over_bound_with_human for s in result.stats.values())
        print(f"denied over-bound commands: {total_denied}")
        print(f"executed over-bound commands with human present: {total_over}")
    return EX_OK


def _cmd_serve(args) -> int:
    try:
        scenario = _load_run_scenario(args)
        from dataclasses import replace

        # Humans decide through the console; nothing is scripted.
        scenario = replace(scenario, approver="none")
        runner = Runner(scenario)
    except ScenarioInvalidError as exc:
        print(f"scenario invalid: {exc}", file=sys.stderr)
        return EX_SCENARIO
    facade = BrokerFacade(runner.broker, runner.d, runner.audit, scenario.name)
    server = ApiServer(facade, args.host, args.port)
    server.start()
    print(
        f"approval API at http://{args.host}:{server.port}/api/v1 (tick rate {args.tick_rate}/s)",
        flush=True,
    )
    interval = 1.0 / max(args.tick_rate, 0.1)
    try:
        while True:
            advanced = runner.step()
            runner.drain_resolutions()
            facade.update(
                runner.tick,
                {a: t.score for a, t in runner.trust.items()},
                sorted(runner.governor.contracted),
            )
            if not advanced and not runner.pending_work():
                if not args.linger:
                    break
            time.sleep(interval)
    except KeyboardInterrupt:
        pass
    finally:
        runner.finalize()
        server.stop()
    print(f"run finished after {runner.tick} ticks")
    return EX_OK


def _cmd_coverage(args) -> int:
    report = coverage_mod.run_coverage(seed=args.seed)
    print(report.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.table() + "\n")
    return EX_OK if report.passed == report.total else EX_SCENARIO


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config_default = os.environ.get("ZTPM_CONFIG")
    if config_default and getattr(args, "scenario", None) in (None, "-"):
        args.scenario = config_default
    handlers = {
        "validate": _cmd_validate,
        "run": _cmd_run,
        "experiment": _cmd_experiment,
        "serve": _cmd_serve,
        "coverage": _cmd_coverage,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_VALIDATION
    except yaml.YAMLError as exc:
        print(f"error: malformed document: {exc}", file=sys.stderr)
        return EX_VALIDATION
    except PredicateSyntaxError as exc:
        print(f"error: bad predicate at {exc}", file=sys.stderr)
        return EX_VALIDATION
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid document content: {exc!r}", file=sys.stderr)
        return EX_VALIDATION


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
