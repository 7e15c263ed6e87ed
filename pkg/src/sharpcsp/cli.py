"""Command-line surface for classification, counting, gadget derivation
and reductions.

Exit codes: 0 success, 2 parse failure, 3 resource limit, 4 precondition
violation, 5 internal verification failure.  Identical inputs produce
byte-identical output; JSON is the schema-stable machine format, text is
for reading.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import affine_count
from .classifier import classify
from .errors import (
    ParseError,
    PreconditionError,
    ResourceLimitError,
    SharpCspError,
    VerificationError,
)
from .gadgets import (
    from_non_affine,
    from_non_complement_closed,
    from_ternary_case,
    nand_from_implies_xor,
    or_or_xor_from_im2_violation,
    parse_gadget,
    pin_from_validity,
    serialize_gadget,
    verify_implementation,
)
from .graphs import BipartiteGraph, Graph, count_independent_sets, \
    count_independent_sets_bipartite, parse_graph
from .instances import Instance, brute_force_count, parse_instance, serialize_instance
from .reductions import (
    DEFAULT_DOWNSET_CAP,
    IDENTITY_STEP,
    RecoveryRecipe,
    Unsatisfiable,
    atomize,
    column_plan,
    compile_hardness_chain,
    count_downsets,
    encode_bis,
    encode_is_nand,
    encode_is_or,
    im2_to_downsets,
    inline_gadget_reduce,
    merge_reduce,
    pinning_reduce,
    verify_chain,
)
from .relations import builtin, im2_witness, parse_language


@dataclass
class RunConfig:
    format: str = "text"
    max_brute_vars: int = 24
    seed: int = 0

    def __post_init__(self):
        if self.max_brute_vars < 1:
            raise PreconditionError("--max-brute-vars must be at least 1")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _emit(cfg: RunConfig, payload: dict, text_lines: list[str]) -> None:
    if cfg.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# classify


def cmd_classify(cfg: RunConfig, args) -> int:
    lang = parse_language(_read(args.language_file))
    result = classify(lang)
    lines = [f"verdict: {result.verdict.value}"]
    for r in result.per_relation:
        lines.append(f"relation {r.name}: affine={'yes' if r.affine else 'no'} "
                     f"im2={'yes' if r.im2 else 'no'}")
    if result.non_affine is not None:
        name, w = result.non_affine
        j = w.to_json()
        lines.append(f"non-affine witness on {name}: a={j['a']} b={j['b']} "
                     f"c={j.get('c', '-')} d={j['d']}")
    if result.non_im2 is not None:
        name, w = result.non_im2
        j = w.to_json()
        lines.append(f"closure witness on {name}: {j['t']} {j['op']} {j['t2']} = "
                     f"{j['result']} escapes")
    _emit(cfg, result.to_json(), lines)
    return 0


# ---------------------------------------------------------------------------
# count


def cmd_count(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance_file), base_dir=Path(args.instance_file).parent)
    all_affine = affine_count.uses_only_affine(inst)
    method = args.method
    if method == "auto":
        method = "affine" if all_affine else "brute"
    if method == "affine":
        if not all_affine:
            raise PreconditionError("affine counting requested but a used relation is not affine")
        value = affine_count.count_solutions(affine_count.instance_to_system(inst))
    else:
        value = brute_force_count(inst, cfg.max_brute_vars)
    _emit(cfg, {"count": value, "method": method}, [f"count: {value}", f"method: {method}"])
    return 0


# ---------------------------------------------------------------------------
# gadget


def _resolve_relation(name: str, language_file: str | None):
    if language_file is not None:
        lang = parse_language(_read(language_file))
        if name in lang:
            return name, lang[name]
    return name, builtin(name)


def cmd_gadget(cfg: RunConfig, args) -> int:
    if args.construction == "nand-implies-xor":
        gadgets = [nand_from_implies_xor()]
    else:
        if args.relation is None:
            raise PreconditionError("this construction needs a relation name")
        name, rel = _resolve_relation(args.relation, args.language)
        if args.construction == "non-affine":
            gadgets = [from_non_affine(name, rel, args.pin)]
        elif args.construction == "ternary-case":
            gadgets = [from_ternary_case(name, rel)]
        elif args.construction == "validity-pin":
            gadgets = [pin_from_validity(name, rel)]
        elif args.construction == "complement-pair":
            gadgets = list(from_non_complement_closed(name, rel))
        else:  # im2-violation
            gadgets = [or_or_xor_from_im2_violation(name, rel, im2_witness(rel))]
    payload = {"gadgets": [
        {**g.to_json(), "verified": verify_implementation(g, cfg.max_brute_vars),
         "serialized": serialize_gadget(g)}
        for g in gadgets
    ]}
    lines = []
    for g in gadgets:
        lines.append(serialize_gadget(g).rstrip("\n"))
        lines.append(f"# claims {g.target_name}; verified="
                     f"{'yes' if verify_implementation(g, cfg.max_brute_vars) else 'no'}")
        for note in g.branch:
            lines.append(f"# branch: {note}")
        lines.append("")
    _emit(cfg, payload, lines[:-1] if lines else [])
    return 0


# ---------------------------------------------------------------------------
# reduce


def _emit_reduction(cfg: RunConfig, inst: Instance, recipe, verify: dict | None,
                    extra: dict | None = None, extra_lines: list[str] | None = None) -> None:
    text = serialize_instance(inst, include_language=True)
    payload = {"instance": text, "recipe": recipe.to_json()}
    if extra:
        payload.update(extra)
    if verify is not None:
        payload["verify"] = verify
    lines = [text.rstrip("\n"), f"recipe: {json.dumps(recipe.to_json())}"]
    if extra_lines:
        lines.extend(extra_lines)
    if verify is not None:
        lines.append(f"verify: {json.dumps(verify)}")
    _emit(cfg, payload, lines)


def cmd_reduce_pin(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance_file), base_dir=Path(args.instance_file).parent)
    plan = None
    if args.relation is not None:
        rel = inst.language.resolve(args.relation)
        plan = column_plan(args.relation, rel, args.value)
        if plan is None:
            raise PreconditionError(
                f"relation {args.relation} has no column unbalanced toward {args.value}")
    else:
        for name, rel in inst.language.items():
            plan = column_plan(name, rel, args.value)
            if plan is not None:
                break
        if plan is None:
            raise PreconditionError(
                f"no relation in the language has a column unbalanced toward {args.value}")
    result = pinning_reduce(inst, plan)
    verify = None
    if args.verify:
        before = brute_force_count(inst, cfg.max_brute_vars)
        after = brute_force_count(result.instance, cfg.max_brute_vars)
        recovered = result.recipe.apply(after)
        ok = recovered == before
        if not ok:
            raise VerificationError("floor-recovery identity failed")
        verify = {"source_count": before, "transformed_count": after,
                  "recovered": recovered, "passed": ok}
    _emit_reduction(
        cfg, result.instance, result.recipe, verify,
        extra={"plan": plan.to_json(), "m": result.m, "n0": result.n0, "scale": result.scale},
        extra_lines=[f"plan: {json.dumps(plan.to_json())}",
                     f"m: {result.m}  n0: {result.n0}  scale: {result.scale}"],
    )
    return 0


def cmd_reduce_merge(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance_file), base_dir=Path(args.instance_file).parent)
    out, recipe = merge_reduce(inst)
    verify = None
    if args.verify:
        before = brute_force_count(inst, cfg.max_brute_vars)
        after = brute_force_count(out, cfg.max_brute_vars)
        ok = after == 2 * before
        if not ok:
            raise VerificationError("doubling identity failed")
        verify = {"source_count": before, "transformed_count": after, "passed": ok}
    _emit_reduction(cfg, out, recipe, verify)
    return 0


def cmd_reduce_inline(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance_file), base_dir=Path(args.instance_file).parent)
    gadget = parse_gadget(_read(args.gadget))
    out, recipe = inline_gadget_reduce(inst, gadget, cfg.max_brute_vars)
    verify = None
    if args.verify:
        before = brute_force_count(inst, cfg.max_brute_vars)
        after = brute_force_count(out, cfg.max_brute_vars)
        ok = after == before
        if not ok:
            raise VerificationError("count-preservation identity failed")
        verify = {"source_count": before, "transformed_count": after, "passed": ok}
    _emit_reduction(cfg, out, recipe, verify)
    return 0


def cmd_reduce_downsets(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance_file), base_dir=Path(args.instance_file).parent)
    atomic = atomize(inst)
    result = im2_to_downsets(atomic)
    if isinstance(result, Unsatisfiable):
        payload: dict = {"poset": None, **result.to_json()}
        lines = [f"unsatisfiable: variables {', '.join(sorted(result.clash))} "
                 "are forced both ways", "downsets: 0"]
        downsets = 0
    else:
        downsets = count_downsets(result, min(cfg.max_brute_vars, DEFAULT_DOWNSET_CAP))
        payload = {"poset": result.to_json(), "unsatisfiable": False}
        lines = []
        for i, element in enumerate(result.elements):
            lines.append(f"element {i}: {' '.join(element)}")
        for i in range(len(result.elements)):
            for j in range(len(result.elements)):
                if i != j and result.leq[i][j]:
                    lines.append(f"order: {i} <= {j}")
        lines.append(f"downsets: {downsets}")
    payload["downsets"] = downsets
    if args.verify:
        count = brute_force_count(inst, cfg.max_brute_vars)
        ok = count == downsets
        if not ok:
            raise VerificationError("downset identity failed")
        payload["verify"] = {"source_count": count, "downsets": downsets, "passed": ok}
        lines.append(f"verify: {downsets} = {count}, PASS")
    _emit(cfg, payload, lines)
    return 0


def cmd_reduce_graph_is(cfg: RunConfig, args) -> int:
    g = parse_graph(_read(args.graph_file))
    if not isinstance(g, Graph):
        raise PreconditionError("graph-is needs a plain graph, not a bipartite one")
    inst = encode_is_nand(g) if args.relation == "NAND" else encode_is_or(g)
    verify = None
    if args.verify:
        want = count_independent_sets(g, cfg.max_brute_vars)
        got = brute_force_count(inst, cfg.max_brute_vars)
        ok = want == got
        if not ok:
            raise VerificationError("independent-set bijection failed")
        verify = {"independent_sets": want, "instance_count": got, "passed": ok}
    _emit_reduction(cfg, inst, RecoveryRecipe((IDENTITY_STEP,)), verify)
    return 0


def cmd_reduce_graph_bis(cfg: RunConfig, args) -> int:
    g = parse_graph(_read(args.graph_file))
    if not isinstance(g, BipartiteGraph):
        raise PreconditionError("graph-bis needs a bipartite graph")
    inst = encode_bis(g)
    verify = None
    if args.verify:
        want = count_independent_sets_bipartite(g, cfg.max_brute_vars)
        got = brute_force_count(inst, cfg.max_brute_vars)
        ok = want == got
        if not ok:
            raise VerificationError("independent-set bijection failed")
        verify = {"independent_sets": want, "instance_count": got, "passed": ok}
    _emit_reduction(cfg, inst, RecoveryRecipe((IDENTITY_STEP,)), verify)
    return 0


def cmd_reduce_chain(cfg: RunConfig, args) -> int:
    lang = parse_language(_read(args.language))
    source = parse_graph(_read(args.graph))
    chain = compile_hardness_chain(lang, source, cfg.max_brute_vars)
    payload = chain.to_json()
    lines = [f"verdict: {chain.verdict.value}", f"pin: {chain.pin}",
             f"strategy: {chain.strategy.kind}"]
    for step in chain.steps:
        lines.append(f"step {step.op}: {step.detail} "
                     f"[{len(step.instance.variables)} vars, "
                     f"{len(step.instance.constraints)} constraints]")
    lines.append(serialize_instance(chain.final, include_language=True).rstrip("\n"))
    lines.append(f"recipe: {json.dumps(chain.recipe.to_json())}")
    if args.verify:
        ver = verify_chain(chain, source, cfg.max_brute_vars)
        if not ver.passed:
            raise VerificationError("chain verification failed")
        payload["verify"] = ver.to_json()
        for check in ver.checks:
            lines.append(f"check {check.op}: {'PASS' if check.ok else 'FAIL'} "
                         f"({check.lhs} vs {check.rhs})")
        lines.append(f"recovered: {ver.recovered}, "
                     f"{'PASS' if ver.passed else 'FAIL'}")
    _emit(cfg, payload, lines)
    return 0


# ---------------------------------------------------------------------------
# wiring


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", choices=("text", "json"), default="text",
                        help="output format (json is schema-stable)")
    shared.add_argument("--max-brute-vars", type=int, default=24, metavar="N",
                        help="enumeration cap for exhaustive counting")
    shared.add_argument("--seed", type=int, default=0,
                        help="seed for randomized probes")
    verify = argparse.ArgumentParser(add_help=False)
    verify.add_argument("--verify", action="store_true",
                        help="brute-force both sides and check the identity")

    parser = argparse.ArgumentParser(
        prog="sharpcsp",
        description="Classify Boolean constraint languages by counting complexity, "
                    "count satisfying assignments, and run verifiable reductions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[shared],
                       help="classify a constraint language with witnesses")
    p.add_argument("language_file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("count", parents=[shared], help="count satisfying assignments")
    p.add_argument("instance_file")
    p.add_argument("--method", choices=("auto", "affine", "brute"), default="auto")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("gadget", parents=[shared], help="derive and verify a gadget")
    p.add_argument("relation", nargs="?", help="relation name (built-in or from --language)")
    p.add_argument("--language", help="relation definitions file")
    p.add_argument("--pin", type=int, choices=(0, 1), default=0)
    p.add_argument("--construction",
                   choices=("non-affine", "ternary-case", "validity-pin",
                            "complement-pair", "im2-violation", "nand-implies-xor"),
                   default="non-affine")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("reduce", help="instance transformations with recovery recipes")
    rsub = p.add_subparsers(dest="reduction", required=True)

    rp = rsub.add_parser("pin", parents=[shared, verify],
                         help="absorb unary pins by replication blocks")
    rp.add_argument("instance_file")
    rp.add_argument("--relation", help="relation to replicate on (default: first usable)")
    rp.add_argument("--value", type=int, choices=(0, 1), default=0)
    rp.set_defaults(func=cmd_reduce_pin)

    rp = rsub.add_parser("merge", parents=[shared, verify],
                         help="absorb zero pins over a complement-closed language")
    rp.add_argument("instance_file")
    rp.set_defaults(func=cmd_reduce_merge)

    rp = rsub.add_parser("inline", parents=[shared, verify],
                         help="substitute a gadget for its target constraints")
    rp.add_argument("instance_file")
    rp.add_argument("--gadget", required=True, help="gadget file")
    rp.set_defaults(func=cmd_reduce_inline)

    rp = rsub.add_parser("downsets", parents=[shared, verify],
                         help="reduce a closed-language instance to a poset")
    rp.add_argument("instance_file")
    rp.set_defaults(func=cmd_reduce_downsets)

    rp = rsub.add_parser("graph-is", parents=[shared, verify],
                         help="encode independent-set counting")
    rp.add_argument("graph_file")
    rp.add_argument("--relation", choices=("NAND", "OR"), default="NAND")
    rp.set_defaults(func=cmd_reduce_graph_is)

    rp = rsub.add_parser("graph-bis", parents=[shared, verify],
                         help="encode bipartite independent-set counting")
    rp.add_argument("graph_file")
    rp.set_defaults(func=cmd_reduce_graph_bis)

    rp = rsub.add_parser("chain", parents=[shared, verify],
                         help="compose the full hardness chain for a language")
    rp.add_argument("--language", required=True)
    rp.add_argument("--graph", required=True)
    rp.set_defaults(func=cmd_reduce_chain)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.format, args.max_brute_vars, args.seed)
        return args.func(cfg, args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except VerificationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 5
    except SharpCspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
