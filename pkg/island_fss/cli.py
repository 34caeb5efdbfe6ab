"""
island-fss コマンドラインインターフェース

データセット読み込み、エンジン実行、指標計算、結果ファイル出力をつなぎ、
再現可能な実験を行います。

サブコマンド:
- run:     シード付きで runs 回の実験を実行し、フロント CSV・サマリー JSON・EAF を出力
- compare: 2 つのサマリーの HV をプール分散 t 検定で比較
- bench:   逐次実行と並列実行の経過時間を比較し、スピードアップを表示
- eaf:     フロント CSV から best/median/worst の達成曲面を出力
- synth:   特徴量 {0,1,2} がラベルを決める合成データセットを出力
"""

import argparse
import logging
import time
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from island_fss import __version__
from island_fss.algorithms import ALGORITHMS, GaParams, PsoParams
from island_fss.dataset import (
    Dataset,
    fit_min_max,
    load_dense,
    load_sparse,
    random_oversample,
    stratified_split,
    write_dense,
    write_sparse,
)
from island_fss.engine import EngineConfig, run, same_populations
from island_fss.errors import DatasetError, IslandFSSError, ReportError
from island_fss.metrics import FrontSet, eaf, speedup, summarize, t_test_pooled
from island_fss.presets import DEFAULT_PRESET, PRESETS
from island_fss.reports import (
    front_filename,
    read_front,
    read_hv_per_run,
    render_eaf_svg,
    write_eaf,
    write_front,
    write_summary,
)
from island_fss.synthetic import make_planted

logger = logging.getLogger(__name__)

AucSource = Literal["train", "test"]


class ExperimentSpec(BaseSettings):
    """
    実験の設定クラス

    優先順位: コマンドライン引数 > 環境変数 (ISLAND_FSS_ プレフィックス) > プリセット > 既定値
    """

    model_config = SettingsConfigDict(env_prefix="ISLAND_FSS_")

    # データセット
    data: Path | None = None
    data_format: Literal["dense", "sparse"] = "dense"
    test_fraction: float = 0.2
    ros: bool = False

    # アルゴリズムとプリセット
    algorithm: Literal["nsga2", "nspso", "moead"] = "nsga2"
    preset: Literal["epsilon", "ieee_malware", "ova_omentum", "ova_uterus", "ddos"] = DEFAULT_PRESET

    # 島モデル (None はプリセットから補完)
    n: int | None = None
    local_n: int | None = None
    k: int = 4
    m_gen: int | None = None
    m_mig: int | None = None
    runs: int = 20
    seed: int = 0
    reevaluate: bool = False

    # 変異パラメータ (None はプリセットから補完)
    pc: float | None = None
    pm: float | None = None
    w: float | None = None
    c1: float | None = None
    c2: float | None = None
    omega: float = 1.0
    vmax: float = 4.0
    moead_t: int | None = None

    # 実行と出力
    sequential: bool = False
    jobs: int | None = None
    out: Path = Path("results")
    auc_source: AucSource = "test"
    hv_source: AucSource = "train"

    def model_post_init(self, __context):
        """プリセットから未指定の値を補完し、エンジン設定として検証"""
        preset = PRESETS[self.preset]
        ga = preset.ga_for(self.algorithm)
        for name, value in (
            ("n", preset.n),
            ("local_n", preset.local_n),
            ("m_gen", preset.m_gen),
            ("m_mig", preset.m_mig),
            ("pc", ga.pc),
            ("pm", ga.pm),
            ("w", preset.pso.w),
            ("c1", preset.pso.c1),
            ("c2", preset.pso.c2),
        ):
            if getattr(self, name) is None:
                setattr(self, name, value)
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        self.engine_config(self.seed)

    def engine_config(self, seed: int, parallel: bool | None = None) -> EngineConfig:
        return EngineConfig(
            algorithm=self.algorithm,
            n=self.n,
            local_n=self.local_n,
            k=self.k,
            m_gen=self.m_gen,
            m_mig=self.m_mig,
            seed=seed,
            ga=GaParams(pc=self.pc, pm=self.pm),
            pso=PsoParams(w=self.w, c1=self.c1, c2=self.c2, omega=self.omega, vmax=self.vmax),
            moead_t=self.moead_t,
            reevaluate_on_migrate=self.reevaluate,
            runs=self.runs,
            parallel=not self.sequential if parallel is None else parallel,
            n_jobs=self.jobs,
        )


def load_dataset(path: Path, data_format: str) -> Dataset:
    if data_format == "sparse":
        return load_sparse(path)
    return load_dense(path)


def prepare_splits(spec: ExperimentSpec) -> tuple[Dataset, Dataset]:
    """
    データセットを読み込み、層化分割・ROS・min-max スケーリングを適用

    --data が未指定の場合は合成データセットを使用します。

    Returns:
        (train, test): スケーリング済みの学習データとテストデータ
    """
    if spec.data is None:
        logger.info("No --data given; using the planted synthetic dataset")
        ds = make_planted(seed=spec.seed)
    else:
        ds = load_dataset(spec.data, spec.data_format)
    train, test = stratified_split(ds, spec.test_fraction, spec.seed)
    if spec.ros:
        before = train.n_rows
        train = random_oversample(train, spec.seed)
        logger.info(f"Random oversampling: {before} -> {train.n_rows} training rows")
    scaling = fit_min_max(train)
    return train.with_scaling(scaling), test.with_scaling(scaling)


def log_banner(spec: ExperimentSpec, title: str) -> None:
    logger.info("=" * 70)
    logger.info(title)
    logger.info("=" * 70)
    logger.info(f"\n[Configuration]")
    logger.info(f"  Dataset:          {spec.data or 'planted synthetic'} ({spec.data_format})")
    logger.info(f"  Algorithm:        {spec.algorithm} (preset {spec.preset})")
    logger.info(f"  Population:       N={spec.n}, localN={spec.local_n}, k={spec.k}")
    logger.info(f"  Generations:      mGen={spec.m_gen}, mMig={spec.m_mig}")
    if spec.algorithm == "nspso":
        logger.info(f"  PSO:              w={spec.w}, c1={spec.c1}, c2={spec.c2}, omega={spec.omega}, vmax={spec.vmax}")
    else:
        logger.info(f"  Variation:        pc={spec.pc}, pm={spec.pm}")
    if spec.algorithm == "moead":
        logger.info(f"  Neighborhood T:   {spec.engine_config(spec.seed).moead_t}")
    logger.info(f"  Runs:             {spec.runs} (seed {spec.seed}..{spec.seed + spec.runs - 1})")
    logger.info(f"  Execution:        {'sequential' if spec.sequential else 'parallel'}")
    logger.info(f"  Output:           {spec.out}")


def cmd_run(spec: ExperimentSpec) -> int:
    """
    シード付きで runs 回の実験を実行し、結果ファイルを出力

    出力ファイル:
    - front_runXX.csv: 各実行の最終個体群
    - summary.json:    平均 AUC・最頻部分集合・最小基数部分集合・HV
    - eaf.csv / eaf.svg: 達成曲面
    - config.json:     解決済みの実験設定

    Returns:
        int: 終了コード（0: 正常終了）
    """
    if spec.data is None:
        raise DatasetError("run needs --data (use `island-fss synth` to create a dataset)")
    train, test = prepare_splits(spec)

    spec.out.mkdir(parents=True, exist_ok=True)
    if any(spec.out.glob("front_run*.csv")):
        logger.warning(f"{spec.out} already holds front files; they will be overwritten")
    (spec.out / "config.json").write_text(spec.model_dump_json(indent=2) + "\n", encoding="utf-8")

    reports = []
    for index in range(spec.runs):
        report = run(spec.engine_config(spec.seed + index), train, test)
        write_front(report.final_population, spec.out / front_filename(index))
        reports.append(report)
        logger.info(f"Run {index + 1}/{spec.runs} finished in {report.wall_times['total']:.2f}s")

    summary = summarize(reports, auc_source=spec.auc_source, hv_source=spec.hv_source)
    write_summary(summary.to_dict(), spec.out / "summary.json")

    fronts = [FrontSet.from_population(r.final_population, i, spec.hv_source) for i, r in enumerate(reports)]
    surfaces = eaf(fronts)
    write_eaf(surfaces, spec.out / "eaf.csv")
    render_eaf_svg(surfaces, spec.out / "eaf.svg", title=f"{spec.algorithm}, {spec.runs} runs")

    logger.info(
        f"\n✅ Mean AUC {summary.mean_auc:.4f}, mean cardinality {summary.mean_cardinality:.4f}, "
        f"mean HV {summary.mean_hv:.4f}"
    )
    logger.info(f"Results written to {spec.out}")
    return 0


def cmd_compare(summary_a: Path, summary_b: Path, alpha: float = 0.05) -> int:
    """2 つのサマリーの実行ごとの HV をプール分散 t 検定で比較"""
    a = read_hv_per_run(summary_a)
    b = read_hv_per_run(summary_b)
    result = t_test_pooled(a, b, alpha)
    print(f"{'comparison':<40} {'t-statistic':>12} {'p-value':>12} {'reject':>7}")
    print(
        f"{summary_a.parent.name + ' vs ' + summary_b.parent.name:<40} "
        f"{result.t_statistic:>12.6g} {result.p_value:>12.6g} {'T' if result.reject else 'F':>7}"
    )
    print(f"dof = {result.dof}, alpha = {alpha}")
    return 0


def cmd_bench(spec: ExperimentSpec) -> int:
    """
    同じシードの実験を逐次実行と並列実行で 1 回ずつ行い、スピードアップを表示

    両モードの結果が一致しない場合は正しさの失敗として終了コード 1 を返します。
    """
    train, test = prepare_splits(spec)

    started = time.perf_counter()
    sequential = run(spec.engine_config(spec.seed, parallel=False), train, test)
    t_sequential = time.perf_counter() - started

    started = time.perf_counter()
    parallel = run(spec.engine_config(spec.seed, parallel=True), train, test)
    t_parallel = time.perf_counter() - started

    if not same_populations(sequential.final_population, parallel.final_population):
        logger.error("Sequential and parallel runs produced different final populations")
        return 1

    ratio = speedup(t_sequential, t_parallel)
    print(f"{'mode':<12} {'wall time (s)':>14}")
    print(f"{'sequential':<12} {t_sequential:>14.6g}")
    print(f"{'parallel':<12} {t_parallel:>14.6g}")
    print(f"speedup = {ratio:.2f} (k = {spec.k})")
    if ratio < 1.0:
        logger.warning(f"Parallel execution was slower than sequential (speedup {ratio:.2f})")
    return 0


def cmd_eaf(front_files: list[Path], output: Path, auc_source: AucSource = "train") -> int:
    """フロント CSV から達成曲面の CSV と SVG を出力"""
    fronts = [read_front(path, run_id, auc_source) for run_id, path in enumerate(front_files)]
    surfaces = eaf(fronts)
    output.parent.mkdir(parents=True, exist_ok=True)
    write_eaf(surfaces, output)
    render_eaf_svg(surfaces, output.with_suffix(".svg"), title=f"{len(fronts)} runs")
    logger.info(f"EAF surfaces of {len(fronts)} runs written to {output}")
    return 0


def cmd_synth(rows: int, features: int, seed: int, out: Path, data_format: str = "dense") -> int:
    """合成データセットを出力"""
    ds = make_planted(n_rows=rows, n_features=features, seed=seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    if data_format == "sparse":
        write_sparse(ds, out)
    else:
        write_dense(ds, out)
    negatives, positives = ds.class_counts()
    logger.info(f"Wrote {rows} x {features} planted dataset to {out} ({negatives} negatives, {positives} positives)")
    return 0


# argparse dest -> ExperimentSpec field
_SPEC_FLAGS = {
    "data": "data",
    "data_format": "data_format",
    "algo": "algorithm",
    "preset": "preset",
    "pop": "n",
    "local": "local_n",
    "islands": "k",
    "gens": "m_gen",
    "migs": "m_mig",
    "runs": "runs",
    "seed": "seed",
    "pc": "pc",
    "pm": "pm",
    "w": "w",
    "c1": "c1",
    "c2": "c2",
    "omega": "omega",
    "vmax": "vmax",
    "t_neigh": "moead_t",
    "ros": "ros",
    "reeval": "reevaluate",
    "test_fraction": "test_fraction",
    "jobs": "jobs",
    "sequential": "sequential",
    "out": "out",
    "hv_source": "hv_source",
    "auc_source": "auc_source",
}


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    given = {field: getattr(args, dest) for dest, field in _SPEC_FLAGS.items() if getattr(args, dest, None) is not None}
    return ExperimentSpec(**given)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log DEBUG messages")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--data", type=Path, help="dataset file")
    experiment.add_argument("--format", dest="data_format", choices=["dense", "sparse"])
    experiment.add_argument("--algo", choices=ALGORITHMS)
    experiment.add_argument("--preset", choices=sorted(PRESETS))
    experiment.add_argument("--pop", type=int, help="population size N")
    experiment.add_argument("--local", type=int, help="sub-population size per island")
    experiment.add_argument("--islands", type=int, help="island count k")
    experiment.add_argument("--gens", type=int, help="generations per migration")
    experiment.add_argument("--migs", type=int, help="migration count")
    experiment.add_argument("--runs", type=int)
    experiment.add_argument("--seed", type=int)
    experiment.add_argument("--pc", type=float)
    experiment.add_argument("--pm", type=float)
    experiment.add_argument("--w", type=float)
    experiment.add_argument("--c1", type=float)
    experiment.add_argument("--c2", type=float)
    experiment.add_argument("--omega", type=float)
    experiment.add_argument("--vmax", type=float)
    experiment.add_argument("--t-neigh", type=int, help="MOEA/D neighborhood size T")
    experiment.add_argument("--ros", action="store_true", default=None, help="random oversampling of the minority class")
    experiment.add_argument("--reeval", action="store_true", default=None, help="re-evaluate on the full training set at migration")
    experiment.add_argument("--test-fraction", type=float)
    experiment.add_argument("--jobs", type=int, help="parallel workers (default: k)")
    experiment.add_argument("--sequential", action="store_true", default=None, help="run islands one after another")
    experiment.add_argument("--out", type=Path, help="output directory")
    experiment.add_argument("--hv-source", choices=["train", "test"])
    experiment.add_argument("--auc-source", choices=["train", "test"])

    parser = argparse.ArgumentParser(prog="island-fss", description="Island-model bi-objective feature subset selection")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("run", parents=[common, experiment], help="run a seeded batch of experiments")
    commands.add_parser("bench", parents=[common, experiment], help="sequential vs parallel speedup")

    compare = commands.add_parser("compare", parents=[common], help="pooled t-test on per-run hypervolume")
    compare.add_argument("summary_a", type=Path)
    compare.add_argument("summary_b", type=Path)
    compare.add_argument("--alpha", type=float, default=0.05)

    eaf_cmd = commands.add_parser("eaf", parents=[common], help="attainment surfaces from front files")
    eaf_cmd.add_argument("fronts", type=Path, nargs="+")
    eaf_cmd.add_argument("--output", type=Path, default=Path("eaf.csv"))
    eaf_cmd.add_argument("--auc-source", choices=["train", "test"], default="train")

    synth = commands.add_parser("synth", parents=[common], help="write a planted synthetic dataset")
    synth.add_argument("--rows", type=int, default=500)
    synth.add_argument("--features", type=int, default=20)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--format", dest="data_format", choices=["dense", "sparse"], default="dense")
    synth.add_argument("--out", type=Path, default=Path("planted.csv"))
    return parser


def _one_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
    return str(e).splitlines()[0] if str(e) else type(e).__name__


def main(argv: list[str] | None = None) -> int:
    """
    island-fss を実行

    .env ファイルがあれば読み込み、ISLAND_FSS_ プレフィックスの環境変数を設定として使用します。

    Returns:
        int: 終了コード（0: 正常終了, 1: 実行時エラー, 2: 入力・設定エラー）
    """
    # 環境変数を .env ファイルから読み込み
    load_dotenv()

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        if args.command == "run":
            spec = spec_from_args(args)
            log_banner(spec, "Island-model feature subset selection")
            return cmd_run(spec)
        if args.command == "bench":
            spec = spec_from_args(args)
            log_banner(spec, "Island-model speedup benchmark")
            return cmd_bench(spec)
        if args.command == "compare":
            return cmd_compare(args.summary_a, args.summary_b, args.alpha)
        if args.command == "eaf":
            return cmd_eaf(args.fronts, args.output, args.auc_source)
        if args.command == "synth":
            return cmd_synth(args.rows, args.features, args.seed, args.out, args.data_format)
    except (DatasetError, ReportError) as e:
        logger.error(f"入力エラー: {_one_line(e)}")
        return 2
    except IslandFSSError as e:
        logger.error(f"実行エラー: {_one_line(e)}")
        return 1
    except ValueError as e:
        logger.error(f"設定エラー: {_one_line(e)}")
        return 2
    except OSError as e:
        logger.error(f"ファイルエラー: {e.filename or ''}: {e.strerror or _one_line(e)}")
        return 2
    except Exception as e:
        logger.exception(f"予期しないエラー: {_one_line(e)}")
        return 1
    return 1


if __name__ == "__main__":
    exit(main())
