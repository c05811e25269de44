#!/usr/bin/env python3
"""
命令行工具
分類、標準形、不變量、推前密度、軌道密度、特殊函數表、特徵分佈求值與驗證套件
"""

import sys
import argparse
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Optional

# 添加項目根目錄到 Python 路徑
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
from pydantic import ValidationError

from app.algebra import classify, invariants, normal_form
from app.config import Settings, apply_overrides, settings, use_settings
from app.eigendist import evaluate
from app.errors import AnalyzerError
from app.meanfn import (
    Signature,
    fit_edges,
    gaussian,
    mean_density,
    singular_fit,
    uniform_edges,
)
from app.meanfn.fit import default_side, image_reach
from app.orbint import QTestFunction, orbital_densities, suggest_edges
from app.schemas import BlockVectorModel, CheckResult, EvalRequest, Report, parse_complex
from app.specfun import Kind, SeriesSolution, derivatives, ode_residual
from app.verify import SUITES, TOLERANCES, run_suite

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """參數錯誤，結束碼 2"""


class JsonArgumentParser(argparse.ArgumentParser):
    """參數錯誤時在 stderr 輸出結構化 JSON"""

    def error(self, message: str):
        raise UsageError(message)


def _load_json(text: str) -> Any:
    """直接的 JSON 字串，或 @路徑"""
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    return json.loads(text)


def _block(text: str):
    return BlockVectorModel.model_validate(_load_json(text)).to_block()


def _overrides(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--set 需要 KEY=VAL：{pair}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _enc(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------


def cmd_classify(args) -> tuple[Any, list[CheckResult]]:
    return classify(_block(args.X)).to_dict(), []


def cmd_normal_form(args) -> tuple[Any, list[CheckResult]]:
    return normal_form(_block(args.X)).to_dict(), []


def cmd_invariants(args) -> tuple[Any, list[CheckResult]]:
    return invariants(_block(args.X)).to_dict(), []


def cmd_meanfn(args) -> tuple[Any, list[CheckResult]]:
    sig = Signature(args.p, args.q)
    f = gaussian(sig.n, args.half_width)
    reach = image_reach(sig, f)
    if args.fit:
        edges = fit_edges(settings.fit_t_min, settings.fit_t_max, settings.fit_probes, reach)
    else:
        lo, hi = args.range
        edges = np.concatenate([[-reach], uniform_edges(lo, hi, args.bins), [reach]])
    grid = mean_density(sig, f, edges, args.samples, args.seed)
    result = grid.to_dict()
    if args.fit:
        result["fit"] = singular_fit(grid, sig, default_side(sig)).to_dict()
    if args.format == "csv":
        result["rows"] = grid.rows()
    return result, []


def cmd_orbital_density(args) -> tuple[Any, list[CheckResult]]:
    f = QTestFunction.at(_block(args.center), args.radius, name="bump")
    window = (settings.fit_t_min, settings.fit_t_max) if args.log_window else None
    edges = suggest_edges(f, n_bins=args.bins, seed=args.seed, log_window=window)
    dens = orbital_densities(f, edges["m"], edges["2"], args.samples, args.seed, edges_r=edges["r"])
    if args.export is not None:
        target = args.export or settings.output_dir
        paths = dens.export(target, args.format)
        logger.info(f"已輸出 {len(paths)} 個檔案到 {target}")
    result = dens.to_dict()
    if args.format == "csv":
        result["rows"] = [{"grid": which, **row} for which in ("m", "2", "r") for row in dens.rows(which)]
    return result, []


def cmd_specfun_table(args) -> tuple[Any, list[CheckResult]]:
    lam = parse_complex(args.lam)
    sol = SeriesSolution(lam, Kind(args.kind))
    start, stop, n = args.t
    t = np.linspace(start, stop, int(n))
    if np.any(t == 0) and sol.kind.has_log:
        raise UsageError("含對數的解在 t = 0 無定義")
    y, dy = derivatives(sol, t, 1)
    res = ode_residual(sol, t)
    rows = [{"t": float(ti), "re": complex(yi).real, "im": complex(yi).imag,
             "d_re": complex(di).real, "d_im": complex(di).imag, "ode_residual": abs(complex(ri))}
            for ti, yi, di, ri in zip(t, np.atleast_1d(y), np.atleast_1d(dy), np.atleast_1d(res))]
    return rows, []


def cmd_eigendist(args) -> tuple[Any, list[CheckResult]]:
    req = EvalRequest.model_validate(_load_json(args.input))
    bf = req.basis.to_basis()
    value = evaluate(bf, req.X.to_block())
    return {"basis": bf.to_dict(), "value": _enc(value)}, []


def cmd_verify(args) -> tuple[Any, list[CheckResult]]:
    checks = run_suite(args.suite, args.seed, args.samples)
    summary = {"suite": args.suite, "passed": sum(c.passed for c in checks), "total": len(checks)}
    return summary, checks


COMMANDS = {
    "classify": cmd_classify,
    "normal-form": cmd_normal_form,
    "invariants": cmd_invariants,
    "meanfn": cmd_meanfn,
    "orbital-density": cmd_orbital_density,
    "specfun-table": cmd_specfun_table,
    "eigendist": cmd_eigendist,
    "verify": cmd_verify,
}


def build_parser() -> JsonArgumentParser:
    parser = JsonArgumentParser(
        description='gl(4,ℝ)/gl(2)×gl(2) 不變特徵分佈工具',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
            使用範例:
            python scripts/run_cli.py invariants --X '{"Y": [[2,0],[0,1]], "Z": [[2,0],[0,1]]}'
            python scripts/run_cli.py meanfn --p 1 --q 1 --fit --samples 1000000
            python scripts/run_cli.py verify specfun
            python scripts/run_cli.py --set N_THREADS=8 verify all --samples 10000000
        """
    )
    parser.add_argument('--seed', type=int, default=0, help='亂數種子 (預設: 0)')
    parser.add_argument('--set', action='append', default=[], metavar='KEY=VAL',
                        help='覆寫設定項，可重複，例如 --set FD_STEP=5e-4')
    parser.add_argument('--format', choices=['json', 'csv'], default='json', help='輸出格式 (預設: json)')
    parser.add_argument('--output', type=str, default=None, help='輸出檔案 (預設: stdout)')
    parser.add_argument('--log-level', type=str, default=None, help='日誌等級 (預設: settings.log_level)')

    sub = parser.add_subparsers(dest='command', required=True, parser_class=JsonArgumentParser)

    for name, help_text in (('classify', '正則性類別與開集旗標'), ('normal-form', 'Cartan 標準形 (類別, 參數, h)'),
                            ('invariants', 'Q、S、S0、δ、u、v')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--X', required=True, help='X 的 JSON（{"Y": 2×2, "Z": 2×2}）或 @檔案')

    p = sub.add_parser('meanfn', help='Gauss 函數在 Q_{p,q} 下的推前密度')
    p.add_argument('--p', type=int, required=True)
    p.add_argument('--q', type=int, required=True)
    p.add_argument('--samples', type=int, default=1_000_000)
    p.add_argument('--bins', type=int, default=120)
    p.add_argument('--range', type=float, nargs=2, default=[-3.0, 3.0], metavar=('LO', 'HI'))
    p.add_argument('--half-width', type=float, default=8.0, help='抽樣盒半寬 (預設: 8)')
    p.add_argument('--fit', action='store_true', help='改用對數分箱並擬合 0 附近的展開式')

    p = sub.add_parser('orbital-density', help='q 上 bump 的 Mf_m、Mf₂ 與 (Mf_m)_r')
    p.add_argument('--center', required=True, help='bump 中心 X₀ 的 JSON 或 @檔案')
    p.add_argument('--radius', type=float, required=True)
    p.add_argument('--samples', type=int, default=1_000_000)
    p.add_argument('--bins', type=int, default=40)
    p.add_argument('--log-window', action='store_true', help='t₂ 軸在 0 附近使用對數分箱')
    p.add_argument('--export', nargs='?', const='', default=None,
                   help='另外把三個網格輸出到此目錄（省略目錄時用 OUTPUT_DIR）')

    p = sub.add_parser('specfun-table', help='級數解 Φ、W 的數值表')
    p.add_argument('--lambda', dest='lam', required=True, help='λ，例如 1.5 或 "1+0.5i"')
    p.add_argument('--kind', choices=[k.value for k in Kind], default=Kind.PHI.value)
    p.add_argument('--t', type=float, nargs=3, default=[0.1, 4.0, 40], metavar=('START', 'STOP', 'N'))

    p = sub.add_parser('eigendist', help='特徵分佈基底函數')
    p.add_argument('action', choices=['eval'])
    p.add_argument('--input', required=True, help='{"basis": {...}, "X": {...}} 的 JSON 或 @檔案')

    p = sub.add_parser('verify', help='驗證套件')
    p.add_argument('suite', choices=[*SUITES, 'all'])
    p.add_argument('--samples', type=int, default=None, help='蒙地卡羅樣本數 (預設: settings.verify_samples)')
    return parser


def _csv_rows(command: str, result: Any, checks: list[CheckResult]) -> list[dict]:
    if command == "verify":
        return [{"name": c.name, "passed": c.passed, "details": json.dumps(c.details, sort_keys=True)}
                for c in checks]
    if isinstance(result, list):
        return result
    if isinstance(result, dict) and "rows" in result:
        return result["rows"]
    return [{k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in result.items()}]


def _render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    rows = _csv_rows(report.command, report.result, report.checks)
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _fail_usage(message: str, code: str = "bad_arguments") -> int:
    print(json.dumps({"error": code, "message": message}, ensure_ascii=False), file=sys.stderr)
    return EXIT_USAGE


def run(argv: Optional[list[str]] = None) -> int:
    """執行一次命令，回傳結束碼"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = apply_overrides(_overrides(args.set))
    except UsageError as e:
        return _fail_usage(str(e))
    except (ValidationError, ValueError) as e:
        return _fail_usage(str(e))

    with use_settings(cfg):
        return _execute(args, cfg)


def _execute(args: argparse.Namespace, cfg: Settings) -> int:
    tolerances = cfg.model_dump()
    logging.basicConfig(
        level=(args.log_level or cfg.log_level).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    if args.command == "verify":
        tolerances = {**tolerances, "suites": TOLERANCES}

    inputs = {k: v for k, v in vars(args).items() if k not in ("set", "output", "log_level")}
    try:
        result, checks = COMMANDS[args.command](args)
    except (UsageError, ValidationError, json.JSONDecodeError, FileNotFoundError) as e:
        return _fail_usage(str(e))
    except AnalyzerError as e:
        return _fail_usage(e.message, e.code)
    except ValueError as e:
        return _fail_usage(str(e))

    report = Report(
        command=args.command,
        seed=args.seed,
        samples=getattr(args, "samples", None),
        inputs=inputs,
        tolerances=tolerances,
        result=result,
        checks=checks,
    )
    text = _render(report, args.format)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info(f"報告已寫入 {args.output}")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK if report.passed else EXIT_FAILED


def main():
    """主函數"""
    sys.exit(run())


if __name__ == "__main__":
    main()
