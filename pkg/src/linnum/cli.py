"""Command-line entry point: ``linnum <subcommand> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 usage error,
3 validation failure, 4 Inconclusive verdict under ``--strict``.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys as _sys
from dataclasses import dataclass, field
from pathlib import Path

from . import automata as fa
from . import bounds, decider, langs, padic, reduce
from .automata import Dfa
from .core import check_hypotheses, soittola_params
from .systems import load_system

EXIT_FAIL, EXIT_USAGE, EXIT_INVALID, EXIT_INCONCLUSIVE = 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    format: str = "text"
    seed: int = 0
    slow: bool = False
    strict: bool = False
    validation_max_value: int = 20_000
    count_length: int = 40
    precision: int = 50
    extra: dict = field(default_factory=dict)

    def lines(self):
        keys = ("seed", "slow", "strict", "validation_max_value", "count_length")
        out = [f"config.{k}={getattr(self, k)}" for k in keys]
        out += [f"config.{k}={v}" for k, v in sorted(self.extra.items())]
        return out


def _emit(text):
    _sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- argument helpers ------------------------------------------------------------------


def _system(args):
    if not args.system:
        raise UsageError("--system is required")
    return load_system(args.system)


def _language(sys, args, cfg):
    src = args.lang or "default"
    kw = dict(max_value=cfg.validation_max_value, count_length=cfg.count_length)
    if src == "default":
        return langs.default_language(sys, **kw)
    if src in ("bertrand", "learn"):
        return langs.numeration_dfa(sys, src, **kw)
    path = src[5:] if src.startswith("user:") else src
    return langs.numeration_dfa(sys, "user", dfa=Dfa.loads(Path(path).read_text()), **kw)


def _input_dfa(sys, spec, lang):
    """A DFA file, or ``cong:Q:r1,r2,...`` for a union of residue classes."""
    if spec is None:
        raise UsageError("--dfa is required")
    if spec.startswith("cong:"):
        try:
            _, q, rs = spec.split(":")
            Q, residues = int(q), [int(r) for r in rs.split(",")]
        except ValueError:
            raise UsageError(f"bad congruence spec {spec!r}; use cong:Q:r1,r2") from None
        d = None
        for r in residues:
            c = langs.congruence_dfa(sys, Q, r % Q, lang)
            d = c if d is None else fa.union(d, c)
        return fa.minimize(d)
    return Dfa.loads(Path(spec).read_text())


def _range(text):
    for sep in ("..", ":", "-"):
        if sep in text:
            a, b = text.split(sep, 1)
            return range(int(a), int(b) + 1)
    return range(int(text), int(text) + 1)


def _fmt_val(v):
    return f">={v.bound}" if isinstance(v, padic.AtLeast) else str(v)


# -- subcommands ----------------------------------------------------------------------------


def cmd_seq(args, cfg):
    _emit(" ".join(map(str, _system(args).terms(args.n))))


def cmd_rep(args, cfg):
    sys = _system(args)
    for n in args.values:
        w = sys.greedy_rep(n)
        _emit(f"{n}\t{''.join(map(str, w)) if max(w, default=0) < 10 else ' '.join(map(str, w))}")


def cmd_val(args, cfg):
    sys = _system(args)
    for word in args.words:
        digits = [int(t) for t in word.split(",")] if "," in word else [int(c) for c in word]
        _emit(f"{word}\t{sys.value_of(digits)}\tgreedy={sys.is_greedy(digits)}")


def cmd_check_hypotheses(args, cfg):
    sys = _system(args)
    rep = check_hypotheses(sys, args.horizon)
    C = None
    try:
        C = _language(sys, args, cfg).C
    except langs.ValidationFailed as exc:
        logging.warning("no numeration language: %s", exc)
    rep = rep.with_C(C)
    params = soittola_params(sys)
    for k, v in (("horizon", rep.horizon), ("h2_verified_to", rep.h2_verified_to),
                 ("h3_candidate_G", rep.h3_candidate_G if rep.h3_verified else "unverified"),
                 ("G_from_input", rep.G_from_input), ("R", rep.R), ("C", C), ("Z", rep.Z),
                 ("u", params.u), ("beta", f"{float(params.beta):.12g}"), ("d", params.d),
                 ("K", f"{params.K:.6g}"), ("L", f"{params.L:.6g}")):
        _emit(f"{k}={'' if v is None else v}")


def cmd_lang_dfa(args, cfg):
    sys = _system(args)
    src = args.source
    if src.startswith("user:"):
        args.lang = src
    elif src in ("bertrand", "learn"):
        args.lang = src
    else:
        raise UsageError("--source must be user:FILE, bertrand or learn")
    lang = _language(sys, args, cfg)
    _emit(f"# provenance {lang.provenance} validated_length {lang.validated_length}")
    _emit(lang.dfa.dumps())


def cmd_congruence(args, cfg):
    sys = _system(args)
    lang = _language(sys, args, cfg)
    _emit(langs.congruence_dfa(sys, args.Q, args.r % args.Q, lang).dumps())


def cmd_gamma(args, cfg):
    sys = _system(args)
    _emit(f"gamma={langs.gamma(sys, args.Q, _language(sys, args, cfg))}")


def _certs(sys, path):
    if path is None:
        return None
    if path == "auto":
        return "auto"
    return bounds.parse_certificates(Path(path).read_text())


def cmd_bounds(args, cfg):
    sys = _system(args)
    lang = _language(sys, args, cfg)
    dfa = _input_dfa(sys, args.dfa, lang)
    ld = lang.dfa
    a_pad = decider._padded_input(dfa, ld)
    certs = decider._certificates(sys, _certs(sys, args.certs))
    Z = check_hypotheses(sys).with_C(ld.n).Z
    report = decider.bound_report(sys, a_pad, ld, Z, certs, decider.DecideConfig())
    _emit(report.describe())


def cmd_decide(args, cfg):
    sys = _system(args)
    lang = _language(sys, args, cfg)
    dfa = _input_dfa(sys, args.dfa, lang)
    conf = decider.DecideConfig()
    if args.cap_period:
        conf.period_cap = args.cap_period
    if args.cap_states:
        conf.state_cap = args.cap_states
    v = decider.decide(sys, dfa, lang, _certs(sys, args.certs), conf)
    if cfg.format == "machine":
        _emit(v.machine(conf) + "\n".join(cfg.lines()))
    else:
        _emit(f"outcome: {v.outcome}")
        if v.witness:
            w = v.witness
            _emit(f"period: {w.period}\npreperiod: {w.preperiod}\n"
                  f"residues: {sorted(w.residues)}\nexceptions: {sorted(w.exceptions)}")
        if v.flags:
            _emit(f"flags: {', '.join(v.flags)}")
        for n in v.notes:
            _emit(f"note: {n}")
    if cfg.strict and v.outcome == decider.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return 0


def cmd_padic_val(args, cfg):
    sys = _system(args)
    idx = _range(args.i)
    P = args.precision
    if P is None:
        # nu_p(U_i) <= log_p(U_i), so this many digits makes every value exact
        P = sys.terms(idx.stop)[-1].bit_length() // max(1, args.p.bit_length() - 1) + 2
    vals = padic.valuations_upto(sys, args.p, idx.stop - 1, P)
    for i in idx:
        _emit(f"{i}\t{_fmt_val(vals[i])}")


def cmd_zeta(args, cfg):
    P = args.precision or cfg.precision
    z = padic.zeta_toy(P)
    _emit(str(z.residue))
    _emit("".join(map(str, reversed(z.digits))))


def cmd_check_nu2(args, cfg):
    from .systems import named
    toy = named("toy")
    z = padic.zeta_toy(cfg.precision)
    P = args.max // 2 + 64
    vals = padic.valuations_upto(toy, 2, args.max, P)
    bad = 0
    for i in range(10, args.max + 1):
        c = padic.nu2_closed_form(i, z)
        if c != vals[i]:
            bad += 1
            _emit(f"{i}\t{_fmt_val(vals[i])}\t{c}")
    _emit(f"checked={args.max - 9}\tmismatches={bad}")
    return EXIT_FAIL if bad else 0


def cmd_blocks(args, cfg):
    P = args.precision or 1100
    z = padic.zeta_toy(P)
    upto = min(args.upto, P)
    for a in range(upto):
        l = z.blocks[a]
        _emit(f"{a}\t{'' if l is None else l}")
    rep = padic.check_block_conjecture(z, upto=upto)
    _emit(f"# longest={rep.longest} violations={len(rep.violations)} C={rep.C} D={rep.D}")


def cmd_reduce(args, cfg):
    sys = _system(args)
    form = reduce.detect_merge_form(sys)
    if form is None:
        raise langs.ValidationFailed("system has no merge form U_{i+u} = b U_i")
    lang = _language(sys, args, cfg)
    dfa = _input_dfa(sys, args.dfa, lang)
    out = reduce.reduce_to_base(sys, form, dfa, lang)
    _emit(f"# b={form.b} u={form.u} N={form.N} exactness={form.exactness}")
    _emit(out.dumps())


def cmd_oracle(args, cfg):
    sys = _system(args)
    lang = _language(sys, args, cfg)
    dfa = _input_dfa(sys, args.dfa, lang)
    bits = decider.oracle_membership(sys, dfa, args.n)
    for n, b in enumerate(bits):
        _emit(f"{n}\t{b}")


# -- parser ---------------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--system", help="named system or system file")
    g.add_argument("--lang", help="bertrand | learn | user:FILE | FILE (default: bertrand, else learn)")
    g.add_argument("--format", choices=("text", "machine"), default=argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--slow", action="store_true", default=argparse.SUPPRESS)
    g.add_argument("--strict", action="store_true", default=argparse.SUPPRESS)
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="linnum", parents=[common],
                                description="Linear numeration systems and ultimate periodicity.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.set_defaults(fn=fn)
        return s

    s = add("seq", cmd_seq, "print U_0 .. U_n")
    s.add_argument("-n", type=int, required=True)
    s = add("rep", cmd_rep, "greedy representations")
    s.add_argument("values", type=int, nargs="+")
    s = add("val", cmd_val, "values of digit words (MSDF; comma separated for digits > 9)")
    s.add_argument("words", nargs="+")
    s = add("check-hypotheses", cmd_check_hypotheses, "(H2), (H3), R, Z and growth parameters")
    s.add_argument("--horizon", type=int)
    s = add("lang-dfa", cmd_lang_dfa, "DFA for the numeration language")
    s.add_argument("--source", default="bertrand")
    s = add("congruence", cmd_congruence, "DFA for val = r mod Q")
    s.add_argument("-Q", type=int, required=True)
    s.add_argument("-r", type=int, required=True)
    s = add("gamma", cmd_gamma, "gamma_Q")
    s.add_argument("-Q", type=int, required=True)
    s = add("bounds", cmd_bounds, "period bound report")
    s.add_argument("--dfa", required=True)
    s.add_argument("--certs", help="certificate file or 'auto'")
    s = add("decide", cmd_decide, "decide ultimate periodicity")
    s.add_argument("--dfa", required=True)
    s.add_argument("--certs", help="certificate file or 'auto'")
    s.add_argument("--cap-period", type=int)
    s.add_argument("--cap-states", type=int)
    s = add("padic-val", cmd_padic_val, "TSV of p-adic valuations of U_i")
    s.add_argument("-p", type=int, required=True)
    s.add_argument("-i", required=True, help="index or range a..b")
    s.add_argument("--precision", type=int)
    s = add("zeta", cmd_zeta, "the 2-adic zero of the toy system")
    s.add_argument("--precision", type=int)
    s = add("check-nu2", cmd_check_nu2, "compare the nu_2 closed form with direct valuations")
    s.add_argument("--max", type=int, default=4096)
    s = add("blocks", cmd_blocks, "zero blocks in the 2-adic digits of zeta")
    s.add_argument("--precision", type=int)
    s.add_argument("--upto", type=int, default=1000)
    s = add("reduce", cmd_reduce, "reduce a merge-form system to base b")
    s.add_argument("--dfa", required=True)
    s = add("oracle", cmd_oracle, "membership bits of the DFA's set for n <= N")
    s.add_argument("--dfa", required=True)
    s.add_argument("-n", type=int, default=100)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    cfg = RunConfig(format=getattr(args, "format", "text"), seed=getattr(args, "seed", 0),
                    slow=getattr(args, "slow", False), strict=getattr(args, "strict", False))
    random.seed(cfg.seed)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args, cfg) or 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (langs.ValidationFailed, fa.FormatError, decider.NotSubsetOfNumerationLanguage,
            ValueError, KeyError, FileNotFoundError) as exc:
        print(f"validation failed: {exc}", file=_sys.stderr)
        return EXIT_INVALID


def main():
    _sys.exit(run())


if __name__ == "__main__":
    main()
