"""
Scenario orchestration for the Fano-Anderson simulation engine
"""

import concurrent.futures
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rich.console import Console

from config import ScenarioConfig, settings
from pipelines import PipelineResult, ScenarioPipelines
from tools import CsvExportTool, ManifestTool

console = Console()


class DiagnosticsHandler(logging.Handler):
    """Collects warnings emitted while a pipeline runs, for the manifest."""

    def __init__(self, level: int = logging.WARNING):
        super().__init__(level)
        self.records: List[Dict[str, str]] = []

    def emit(self, record: logging.LogRecord):
        self.records.append({
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        })


class ScenarioRunner:
    """Runs named pipelines on scenario files and writes CSV/JSON artifacts."""

    def __init__(self, output_dir: Optional[str] = None, workers: Optional[int] = None,
                 tolerance_profile: Optional[str] = None):
        """Initialize the runner."""
        self.output_dir = Path(output_dir or settings.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.workers = workers or settings.workers
        self.tolerance_profile = tolerance_profile or settings.tolerance_profile

        self.csv_exporter = CsvExportTool()
        self.manifest_writer = ManifestTool()

    def run(self, config: ScenarioConfig, base_dir: Optional[Path] = None) -> Dict[str, Any]:
        """
        Run the scenario's pipeline and save its artifacts.

        Args:
            config: Validated scenario
            base_dir: Directory that relative data paths in the scenario refer to

        Returns:
            The manifest dictionary that was written

        Raises:
            Whatever the pipeline raised, after partial artifacts and an error
            manifest have been saved
        """
        if config.pipeline == "sweep":
            sweep = config.sweep
            if sweep is None or sweep.parameter is None or not sweep.values:
                raise ValueError("A sweep scenario needs 'sweep.parameter' and 'sweep.values'")
            return self.run_sweep(config, sweep.parameter, sweep.values, base_dir)

        console.print(f"🚀 Running pipeline [bold]{config.pipeline}[/bold] for scenario '{config.name}'")
        result = PipelineResult(config.pipeline)
        handler = DiagnosticsHandler()
        logging.getLogger().addHandler(handler)
        status, error = "ok", None

        try:
            # Step 1: Build numeric objects
            console.print("\n🧱 Step 1: Building scenario...")
            scenario = config.build(base_dir, self.tolerance_profile)
            console.print(f"✅ {scenario.spectral_density!r}, ω0 = {scenario.omega0}, "
                          f"{scenario.grid.steps} samples at Δt = {scenario.grid.dt}")

            # Step 2: Run the pipeline
            console.print(f"🏃 Step 2: Running {config.pipeline}...")
            ScenarioPipelines.get(config.pipeline)(scenario, result)
            if not result.passed:
                status = "checks_failed"
        except Exception as e:
            status, error = "error", f"{type(e).__name__}: {e}"
            raise
        finally:
            logging.getLogger().removeHandler(handler)
            # Step 3: Save whatever exists
            console.print("\n💾 Step 3: Saving artifacts...")
            manifest = self._process_results(config, result, status, error, handler.records)
            self._save_results(result, manifest)

        self._print_checks(result)
        return manifest

    def run_sweep(self, config: ScenarioConfig, parameter: str, values: Sequence[float],
                  base_dir: Optional[Path] = None) -> Dict[str, Any]:
        """Run the base pipeline once per value, concurrently, and aggregate the headlines."""
        base = config.sweep.pipeline if config.sweep is not None else "simulate"
        values = [float(v) for v in values]
        console.print(f"🚀 Sweeping {parameter} over {len(values)} values with pipeline [bold]{base}[/bold] "
                      f"({self.workers} workers)")

        handler = DiagnosticsHandler()
        logging.getLogger().addHandler(handler)
        points: List[Tuple[Optional[PipelineResult], Optional[str]]] = [(None, None)] * len(values)
        try:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
                futures = {
                    executor.submit(self._run_point, config, base, parameter, value, base_dir): index
                    for index, value in enumerate(values)
                }
                completed = 0
                for future in concurrent.futures.as_completed(futures):
                    index = futures[future]
                    points[index] = future.result()
                    completed += 1
                    mark = "✅" if points[index][0] is not None else "❌"
                    console.print(f"   {mark} {parameter} = {values[index]:.6g} ({completed}/{len(values)})")
        finally:
            logging.getLogger().removeHandler(handler)

        tolerances = settings.tolerances(self.tolerance_profile, config.tolerances)
        summary = ScenarioPipelines.summarize_sweep(parameter, values, points, tolerances.scaling_exponent)
        summary.derived.update({"parameter": parameter, "base_pipeline": base})
        status = "ok" if summary.passed and not summary.derived["failures"] else "checks_failed"

        # Threads interleave their records, so sort them for a stable manifest
        diagnostics = sorted(handler.records, key=lambda r: (r["logger"], r["message"], r["level"]))
        console.print("\n💾 Saving sweep artifacts...")
        manifest = self._process_results(config, summary, status, None, diagnostics)
        self._save_results(summary, manifest)
        self._print_checks(summary)
        return manifest

    def _run_point(self, config: ScenarioConfig, pipeline: str, parameter: str, value: float,
                   base_dir: Optional[Path]) -> Tuple[Optional[PipelineResult], Optional[str]]:
        """One isolated sweep point; failures are returned, not raised."""
        try:
            point = config.with_parameter(parameter, value)
            scenario = point.build(base_dir, self.tolerance_profile)
            return ScenarioPipelines.get(pipeline)(scenario, PipelineResult(pipeline)), None
        except Exception as e:
            logging.getLogger(__name__).warning("Sweep point %s = %.6g failed: %s", parameter, value, e)
            return None, f"{type(e).__name__}: {e}"

    def _process_results(self, config: ScenarioConfig, result: PipelineResult, status: str,
                         error: Optional[str], diagnostics: List[Dict[str, str]]) -> Dict[str, Any]:
        """Assemble the manifest."""
        tolerances = settings.tolerances(self.tolerance_profile, config.tolerances)
        return {
            "scenario": config.name,
            "pipeline": result.name,
            "status": status,
            "error": error,
            "config": config.model_dump(mode="python"),
            "tolerance_profile": self.tolerance_profile,
            "tolerances": tolerances.model_dump(),
            "headline": result.headline,
            "derived": result.derived,
            "checks": result.checks,
            "diagnostics": diagnostics,
            "artifacts": sorted(f"{name}.csv" for name in result.tables),
        }

    def _save_results(self, result: PipelineResult, manifest: Dict[str, Any]):
        """Write every table as CSV and the manifest as JSON."""
        for name, columns in result.tables.items():
            path = self.csv_exporter._run(self.output_dir / f"{name}.csv", columns)
            console.print(f"   📄 {path}")
        path = self.manifest_writer._run(self.output_dir / "manifest.json", manifest)
        console.print(f"   📊 {path}")

    @staticmethod
    def _print_checks(result: PipelineResult):
        if not result.checks:
            return
        console.print("\n🔬 Checks:")
        for name in sorted(result.checks):
            check = result.checks[name]
            mark = "✅" if check["passed"] else "❌"
            console.print(f"   {mark} {name}: {check['value']} (tolerance {check['tolerance']:.3g})")
