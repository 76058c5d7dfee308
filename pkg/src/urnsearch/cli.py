"""Command-line interface over problem files.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 enumeration
cap exceeded. Human tables round to 6 decimals; ``--json`` emits the same
numbers at full double precision.
"""

import argparse
import json
import math
import sys

from .dynamics import SearchState, posterior, survival
from .errors import EnumerationCapError, UrnSearchError
from .model import VALIDATION_EPS, Problem, load_problem, validate
from .optimizer import TIE_TOL, optimize, rank_policies
from .policies import Policy, expected_cost, parse_policy_text, policy_text
from .simulator import simulate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_CAP = 3

_TRACE_PAIR_LIMIT = 6


class _Fail(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urnsearch",
        description="Evaluate, optimize, and simulate multi-urn search policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="problem file (JSON)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("validate", help="check prior consistency")
    common(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("eval", help="expected cost of a policy")
    common(p)
    p.add_argument("--policy", required=True, help="comma-separated urn ids")
    p.add_argument("--full", action="store_true", help="policy text is a full draw sequence")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("optimize", help="find an optimal policy")
    common(p)
    p.add_argument("--method", choices=["auto", "sorted", "block-enum", "full-enum"], default="auto")
    p.add_argument("--cap", type=int, help="override the enumeration cap")
    p.set_defaults(handler=_cmd_optimize)

    p = sub.add_parser("trace", help="per-stage probabilities along a policy")
    common(p)
    p.add_argument("--policy", required=True, help="comma-separated urn ids")
    p.add_argument("--full", action="store_true", help="policy text is a full draw sequence")
    p.set_defaults(handler=_cmd_trace)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of a policy's cost")
    common(p)
    p.add_argument("--policy", required=True, help="comma-separated urn ids")
    p.add_argument("--full", action="store_true", help="policy text is a full draw sequence")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("oracle", help="rank every valid policy by brute force")
    common(p)
    p.add_argument("--top", type=int, help="show only the k cheapest policies")
    p.add_argument("--cap", type=int, help="override the enumeration cap")
    p.set_defaults(handler=_cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UrnSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _load_validated(args: argparse.Namespace) -> Problem:
    problem = load_problem(args.file)
    report = validate(problem)
    if not report.ok:
        lines = "\n".join(f"violation: {v}" for v in report.violations)
        raise _Fail(EXIT_INVALID, f"problem file is inconsistent\n{lines}")
    return problem


def _parse_policy(problem: Problem, args: argparse.Namespace) -> Policy:
    return parse_policy_text(problem, args.policy, full=args.full)


def _print_json(payload: object) -> None:
    print(json.dumps(payload, indent=2))


def _cmd_validate(args: argparse.Namespace) -> int:
    problem = load_problem(args.file)
    report = validate(problem)
    if args.json:
        _print_json(
            {
                "valid": report.ok,
                "violations": list(report.violations),
                "warnings": list(report.warnings),
            }
        )
    else:
        for v in report.violations:
            print(f"violation: {v}")
        for w in report.warnings:
            print(f"warning: {w}")
        if report.ok:
            print("valid")
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_eval(args: argparse.Namespace) -> int:
    problem = _load_validated(args)
    policy = _parse_policy(problem, args)
    report = expected_cost(problem, policy)
    if args.json:
        _print_json(
            {
                "policy": [problem.urns[i].id for i in policy.sequence],
                "expected_cost": report.expected_cost,
                "survival_curve": list(report.survival_curve),
                "stage_red_probs": list(report.stage_red_probs),
                "dead_from": report.dead_from,
            }
        )
        return EXIT_OK
    print(f"policy: {policy_text(problem, policy.sequence)}")
    print(f"expected cost: {report.expected_cost:.6f}")
    print("stage  urn  p_red     P(C>t)")
    for t, urn in enumerate(policy.sequence):
        print(
            f"{t:>5}  {problem.urns[urn].id:<4} {report.stage_red_probs[t]:.6f}  "
            f"{report.survival_curve[t]:.6f}"
        )
    if report.dead_from is not None:
        print(f"note: stages from {report.dead_from} on are unreachable (survival 0)")
    return EXIT_OK


def _cmd_optimize(args: argparse.Namespace) -> int:
    problem = _load_validated(args)
    result = optimize(problem, args.method, args.cap)
    order = list(result.best_block.order) if result.best_block else None
    if args.json:
        _print_json(
            {
                "method": result.method,
                "order": [problem.urns[i].id for i in order] if order is not None else None,
                "policy": [problem.urns[i].id for i in result.best_policy.sequence],
                "expected_cost": result.expected_cost,
                "ties": result.ties,
                "notes": list(result.notes),
            }
        )
        return EXIT_OK
    if order is not None:
        print(f"order: {policy_text(problem, tuple(order))}")
    print(f"policy: {policy_text(problem, result.best_policy.sequence)}")
    print(f"expected cost: {result.expected_cost:.6f}")
    print(f"method: {result.method}")
    print(f"ties: {result.ties}")
    for note in result.notes:
        print(f"note: {note}")
    return EXIT_OK


def _trace_rows(problem: Problem, policy: Policy) -> tuple[list[dict], bool]:
    pair_masks = [
        (i, j) for i in range(problem.n_urns) for j in range(i + 1, problem.n_urns)
    ]
    rows: list[dict] = []
    state = SearchState.fresh(problem)
    truncated = False
    for t in range(len(policy.sequence) + 1):
        s = survival(problem, state)
        if s <= VALIDATION_EPS:
            truncated = True
            break
        marginals = {
            problem.urns[i].id: posterior(problem, state, 1 << i) for i in range(problem.n_urns)
        }
        pairs = {}
        for i, j in pair_masks:
            joint = posterior(problem, state, (1 << i) | (1 << j))
            pairs[f"{problem.urns[i].id},{problem.urns[j].id}"] = {
                "joint": joint,
                "product": marginals[problem.urns[i].id] * marginals[problem.urns[j].id],
            }
        row: dict = {
            "stage": t,
            "state": list(state.drawn),
            "survival": s,
            "marginals": marginals,
            "pairs": pairs,
            "draw_urn": None,
            "p_red": None,
        }
        if t < len(policy.sequence):
            urn = policy.sequence[t]
            remaining = problem.urns[urn].marbles - state.drawn[urn]
            row["draw_urn"] = problem.urns[urn].id
            row["p_red"] = marginals[problem.urns[urn].id] / remaining
            state = state.after_draw(urn)
        rows.append(row)
    return rows, truncated


def _cmd_trace(args: argparse.Namespace) -> int:
    problem = _load_validated(args)
    policy = _parse_policy(problem, args)
    rows, truncated = _trace_rows(problem, policy)
    if args.json:
        _print_json(
            {
                "policy": [problem.urns[i].id for i in policy.sequence],
                "rows": rows,
                "truncated": truncated,
            }
        )
        return EXIT_OK
    ids = [u.id for u in problem.urns]
    print(f"policy: {policy_text(problem, policy.sequence)}")
    state_texts = ["(" + ",".join(str(x) for x in row["state"]) + ")" for row in rows]
    state_w = max(5, *(len(s) for s in state_texts))
    marg_heads = [f"P({i})".ljust(8) for i in ids]
    print(f"stage  {'state':<{state_w}}  survival  {'  '.join(marg_heads)}  draw  p_red")
    for row, state_txt in zip(rows, state_texts):
        margs = "  ".join(f"{row['marginals'][i]:.6f}".ljust(8) for i in ids)
        draw = row["draw_urn"] or "-"
        pred = f"{row['p_red']:.6f}" if row["p_red"] is not None else "-"
        print(f"{row['stage']:>5}  {state_txt:<{state_w}}  {row['survival']:.6f}  {margs}  {draw:<4}  {pred}")
    if problem.n_urns <= _TRACE_PAIR_LIMIT and problem.n_urns >= 2:
        print("pair joints (joint | product of marginals):")
        for row in rows:
            cells = "  ".join(
                f"{name}: {vals['joint']:.6f}|{vals['product']:.6f}"
                for name, vals in row["pairs"].items()
            )
            print(f"{row['stage']:>5}  {cells}")
    if truncated:
        print("note: remaining stages are unreachable (survival 0); trace truncated")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise _Fail(EXIT_USAGE, "--trials must be >= 1")
    problem = _load_validated(args)
    policy = _parse_policy(problem, args)
    report = simulate(problem, policy, args.trials, args.seed)
    analytic = expected_cost(problem, policy).expected_cost
    gap = report.mean_cost - analytic
    if report.std_error > 0.0:
        z = gap / report.std_error
    else:
        z = 0.0 if gap == 0.0 else math.inf
    if args.json:
        _print_json(
            {
                "policy": [problem.urns[i].id for i in policy.sequence],
                "trials": report.trials,
                "seed": args.seed,
                "mean_cost": report.mean_cost,
                "std_error": report.std_error,
                "found_rate": report.found_rate,
                "histogram": {str(k): v for k, v in sorted(report.histogram.items())},
                "analytic_cost": analytic,
                "z_score": z,
            }
        )
        return EXIT_OK
    print(f"policy: {policy_text(problem, policy.sequence)}")
    print(f"trials: {report.trials}  seed: {args.seed}")
    print(f"mean cost: {report.mean_cost:.6f}  std error: {report.std_error:.6f}")
    print(f"found rate: {report.found_rate:.6f}")
    print(f"analytic cost: {analytic:.6f}  z-score: {z:.3f}")
    print("cost  count")
    for cost, count in sorted(report.histogram.items()):
        print(f"{cost:>4}  {count}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    problem = _load_validated(args)
    if args.cap is not None:
        ranked = rank_policies(problem, args.cap)
    else:
        ranked = rank_policies(problem)
    best_cost = ranked[0][1]
    block_first = any(
        is_block for _, cost, is_block in ranked if cost <= best_cost + TIE_TOL
    )
    shown = ranked[: args.top] if args.top else ranked
    if args.json:
        _print_json(
            {
                "policies": [
                    {
                        "policy": [problem.urns[i].id for i in policy.sequence],
                        "expected_cost": cost,
                        "block": is_block,
                    }
                    for policy, cost, is_block in shown
                ],
                "total": len(ranked),
                "block_policy_first": block_first,
            }
        )
    else:
        print(f"{len(ranked)} valid policies (cheapest first)")
        print("rank  cost      block  policy")
        for rank, (policy, cost, is_block) in enumerate(shown, start=1):
            marker = "yes" if is_block else "no"
            print(f"{rank:>4}  {cost:.6f}  {marker:<5}  {policy_text(problem, policy.sequence)}")
        print(f"block policy ranked first: {'yes' if block_first else 'NO'}")
    if not block_first:
        print("error: no block policy attains the optimum", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
