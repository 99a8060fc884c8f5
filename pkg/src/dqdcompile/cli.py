"""Command-line interface: ``dqdcompile <command> ...``.

Exit codes: 0 success, 1 usage error, 2 validation or constraint failure,
3 training did not converge.
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields

from . import demos, executor, gates, library, linalg, scheduler, trainer
from .errors import CompilationFailed, DQDError, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NOCONV = 0, 1, 2, 3
TRAIN_KEYS = {f.name for f in fields(trainer.TrainConfig)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coerce(value):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    return value


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = _coerce(value.strip())
    return out


def _train_overrides(args):
    cfg = {k: v for k, v in args.config_values.items() if k in TRAIN_KEYS and k != "seed"}
    if getattr(args, "lr", None) is not None:
        cfg["learning_rate"] = args.lr
    if getattr(args, "max_rounds", None) is not None:
        cfg["max_rounds"] = args.max_rounds
    return cfg


def _emit(args, payload, text):
    if args.json:
        json.dump(payload, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        print(text)


def _gate_line(g):
    return f"{g.name:6s} eps={g.epsilon:.3e} rounds={g.meta.get('rounds')} lr={g.meta.get('learning_rate')}"


def cmd_compile_gate(args):
    g = library.compile_standard(args.name, seed=args.seed, **_train_overrides(args))
    if args.out:
        lib = library.GateLibrary()
        lib.add(g)
        library.save(lib, args.out)
    _emit(args, library.gate_to_dict(g), _gate_line(g))
    return EXIT_OK


def cmd_build_library(args):
    names = args.names.split(",") if args.names else gates.STANDARD_1Q + gates.STANDARD_2Q
    lib = library.GateLibrary()
    for name in names:
        g = library.compile_standard(name, seed=args.seed, **_train_overrides(args))
        lib.add(g)
        if not args.json:
            print(_gate_line(g), flush=True)
    library.save(lib, args.out)
    if args.json:
        _emit(args, {"out": args.out, "gates": {n: g.epsilon for n, g in lib.gates.items()}}, "")
    else:
        print(f"wrote {len(lib)} gates to {args.out}")
    return EXIT_OK


def cmd_compile_circuit(args):
    ir = scheduler.load_circuit(args.circuit)
    s = scheduler.schedule(ir, library.load(args.lib))
    scheduler.save_schedule(s, args.out)
    info = {"out": args.out, "n_qubits": s.n_qubits, "n_slots": s.n_slots,
            "n_segments": len(s.segments), "makespan": s.makespan}
    _emit(args, info, f"{len(ir.ops)} ops -> {s.n_slots} slots, makespan {s.makespan / 3.141592653589793:g} pi; wrote {args.out}")
    return EXIT_OK


def cmd_run(args):
    s = scheduler.load_schedule(args.schedule)
    bits = args.init or "0" * s.n_qubits
    if len(bits) != s.n_qubits or set(bits) - {"0", "1"}:
        raise UsageError(f"--init must be a {s.n_qubits}-character bit string")
    res = executor.execute(s, linalg.basis_state(bits))
    probs = executor.measure_distribution(res.final_state)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(executor.distribution_csv(probs))
    dist = executor.distribution_dict(probs)
    table = executor.expectation_table(res.final_state)
    text = "\n".join(f"{k}  {p:.6f}" for k, p in dist.items())
    _emit(args, {"init": bits, "makespan": res.makespan, "distribution": dist, "expectations": table}, text)
    return EXIT_OK


def cmd_verify(args):
    s = scheduler.load_schedule(args.schedule)
    rep = scheduler.verify_schedule(s)
    text = "\n".join(f"{k:20s} {v}" for k, v in rep.summary().items())
    _emit(args, rep.to_dict(), text)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_demo_grover(args):
    out = demos.grover_demo(library.load(args.lib), seed=args.seed)
    payload = {k: v for k, v in out.items() if k != "schedule"}
    text = "\n".join(f"{k}  {p:.6f}" for k, p in out["distribution"].items())
    _emit(args, payload, text + f"\nmakespan {out['makespan_pi']:g} pi")
    return EXIT_OK


def cmd_demo_maxcut(args):
    lr = args.lr if args.lr is not None else args.config_values.get("learning_rate", 0.1)
    rounds = args.max_rounds if args.max_rounds is not None else args.config_values.get("max_rounds", 200)
    rep = demos.maxcut_demo(library.load(args.lib), lr=lr, max_rounds=int(rounds), seed=args.seed)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "loss", "cut"])
            for r, (loss, cut) in enumerate(zip(rep.loss_history, rep.cut_history), 1):
                w.writerow([r, repr(loss), cut])
    if args.out:
        scheduler.save_schedule(rep.schedule, args.out)
    text = (f"final loss {rep.final_loss:.6f} (optimum {rep.ideal_loss:.6f}), cut {rep.final_cut:g}, "
            f"first optimal round {rep.first_optimal_round}")
    _emit(args, rep.to_dict(), text)
    return EXIT_OK


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="file of key = value overrides")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable stdout")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="dqdcompile", description="Pulse-level compiler for exchange-coupled DQD qubit chains.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="file of key = value overrides")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile-gate", parents=[common], help="train one standard gate")
    c.add_argument("name")
    c.add_argument("--lr", type=float)
    c.add_argument("--max-rounds", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile_gate)

    c = sub.add_parser("build-library", parents=[common], help="train all standard gates")
    c.add_argument("--out", default="lib.json")
    c.add_argument("--names", help="comma-separated subset")
    c.add_argument("--lr", type=float)
    c.add_argument("--max-rounds", type=int)
    c.set_defaults(func=cmd_build_library)

    c = sub.add_parser("compile-circuit", parents=[common], help="schedule a circuit IR")
    c.add_argument("circuit")
    c.add_argument("--lib", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compile_circuit)

    c = sub.add_parser("run", parents=[common], help="execute a schedule")
    c.add_argument("schedule")
    c.add_argument("--init", help="initial basis state, e.g. 01")
    c.add_argument("--csv")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("verify", parents=[common], help="check schedule constraints")
    c.add_argument("schedule")
    c.set_defaults(func=cmd_verify)

    d = sub.add_parser("demo", help="end-to-end demonstrations")
    dsub = d.add_subparsers(dest="demo", required=True, parser_class=_Parser)
    c = dsub.add_parser("grover", parents=[common])
    c.add_argument("--lib", required=True)
    c.set_defaults(func=cmd_demo_grover)
    c = dsub.add_parser("maxcut", parents=[common])
    c.add_argument("--lib", required=True)
    c.add_argument("--lr", type=float)
    c.add_argument("--max-rounds", type=int)
    c.add_argument("--csv", help="per-round loss and cut")
    c.add_argument("--out", help="write the trained schedule")
    c.set_defaults(func=cmd_demo_maxcut)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.config_values = read_config(args.config) if args.config else {}
        if "seed" in args.config_values and "--seed" not in (argv if argv is not None else sys.argv):
            args.seed = int(args.config_values["seed"])
        return args.func(args)
    except UsageError as exc:
        print(f"dqdcompile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CompilationFailed as exc:
        print(f"dqdcompile: not converged: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (DQDError, ValidationError) as exc:
        print(f"dqdcompile: invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"dqdcompile: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
