import { join } from "node:path";

import { column, readCsv, readSeed } from "./csv.js";
import { ChartSpec, renderChart } from "./svg.js";

export const FIGURE_IDS = [
  "hexgrid",
  "jfunction",
  "interference",
  "coverage-compare",
  "coverage-validate",
] as const;

export type FigureId = (typeof FIGURE_IDS)[number];

const DELTA = 1 / (2 - (2 / 3 - Math.sqrt(3) / (2 * Math.PI)));

const BLUE = "#1f77b4";
const ORANGE = "#d62728";
const GREEN = "#2ca02c";
const PURPLE = "#9467bd";

function hexgrid(runDir: string, seed: number): ChartSpec {
  const t = readCsv(join(runDir, "data", "hexgrid_sweep.csv"), ["q_km", "value", "stderr"]);
  return {
    title: "Mutual pair fraction under perturbed hexagonal grids",
    xLabel: "perturbation radius q [km]",
    yLabel: "fraction of points in mutual pairs",
    caption: `Grid points displaced uniformly in a disc of radius q; band is 2 stderr (seed ${seed}).`,
    series: [
      { label: "perturbed grid", x: column(t, "q_km"), y: column(t, "value"), stderr: column(t, "stderr"), color: BLUE, markers: true },
    ],
    hline: { y: DELTA, label: "Poisson limit 0.6215" },
  };
}

function jfunction(runDir: string, seed: number): ChartSpec {
  const singles = readCsv(join(runDir, "data", "jfunction_singles.csv"), ["r_km", "value", "stderr"]);
  const pairs = readCsv(join(runDir, "data", "jfunction_pairs.csv"), ["r_km", "value", "stderr"]);
  return {
    title: "J function of the single and pair subprocesses",
    xLabel: "r [km]",
    yLabel: "J(r)",
    caption: `J > 1 indicates repulsion, J < 1 clustering; bands are 2 stderr (seed ${seed}).`,
    series: [
      { label: "singles", x: column(singles, "r_km"), y: column(singles, "value"), stderr: column(singles, "stderr"), color: BLUE, markers: true },
      { label: "pair centers", x: column(pairs, "r_km"), y: column(pairs, "value"), stderr: column(pairs, "stderr"), color: ORANGE, markers: true },
    ],
    hline: { y: 1, label: "Poisson" },
  };
}

function interference(runDir: string, seed: number): ChartSpec {
  const t = readCsv(join(runDir, "data", "interference_mean.csv"), [
    "r_excl_km",
    "mc_singles",
    "stderr_singles",
    "analytic_singles",
    "mc_pairs",
    "stderr_pairs",
    "analytic_pairs",
  ]);
  const r = column(t, "r_excl_km");
  return {
    title: "Mean interference beyond an exclusion radius",
    xLabel: "exclusion radius [km]",
    yLabel: "mean interference power [W]",
    caption: `Monte Carlo means with 2 stderr bands against the analytic moments (seed ${seed}).`,
    series: [
      { label: "singles MC", x: r, y: column(t, "mc_singles"), stderr: column(t, "stderr_singles"), color: BLUE, markers: true },
      { label: "singles analytic", x: r, y: column(t, "analytic_singles"), color: BLUE, dashed: true },
      { label: "pairs MC", x: r, y: column(t, "mc_pairs"), stderr: column(t, "stderr_pairs"), color: ORANGE, markers: true },
      { label: "pairs analytic", x: r, y: column(t, "analytic_pairs"), color: ORANGE, dashed: true },
    ],
  };
}

const COVERAGE_COLS = ["T_linear", "T_dB", "coverage", "stderr"];

function coverageCompare(runDir: string, seed: number): ChartSpec {
  const mnnr = readCsv(join(runDir, "data", "coverage_mnnr.csv"), COVERAGE_COLS);
  const sup = readCsv(join(runDir, "data", "coverage_superposition.csv"), COVERAGE_COLS);
  return {
    title: "Coverage probability: pair process vs superposition surrogate",
    xLabel: "SIR threshold T [dB]",
    yLabel: "coverage probability",
    caption: `Both curves are Monte Carlo with 2 stderr bands (seed ${seed}).`,
    series: [
      { label: "pair process", x: column(mnnr, "T_dB"), y: column(mnnr, "coverage"), stderr: column(mnnr, "stderr"), color: GREEN, markers: true },
      { label: "superposition", x: column(sup, "T_dB"), y: column(sup, "coverage"), stderr: column(sup, "stderr"), color: PURPLE, markers: true },
    ],
    yMin: 0,
    yMax: 1,
  };
}

function coverageValidate(runDir: string, seed: number): ChartSpec {
  const ana = readCsv(join(runDir, "data", "coverage_analytic.csv"), COVERAGE_COLS);
  const sup = readCsv(join(runDir, "data", "coverage_superposition.csv"), COVERAGE_COLS);
  return {
    title: "Superposition coverage: analytic expression vs simulation",
    xLabel: "SIR threshold T [dB]",
    yLabel: "coverage probability",
    caption: `Simulated curve carries a 2 stderr band (seed ${seed}).`,
    series: [
      { label: "analytic", x: column(ana, "T_dB"), y: column(ana, "coverage"), color: BLUE },
      { label: "simulated", x: column(sup, "T_dB"), y: column(sup, "coverage"), stderr: column(sup, "stderr"), color: ORANGE, markers: true },
    ],
    yMin: 0,
    yMax: 1,
  };
}

const BUILDERS: Record<FigureId, (runDir: string, seed: number) => ChartSpec> = {
  hexgrid,
  jfunction,
  interference,
  "coverage-compare": coverageCompare,
  "coverage-validate": coverageValidate,
};

/** Render one figure id from a completed run directory; returns the SVG text. */
export function renderFigure(id: string, runDir: string): string {
  const builder = BUILDERS[id as FigureId];
  if (!builder) {
    throw new Error(`unknown figure id '${id}' (expected one of: ${FIGURE_IDS.join(", ")})`);
  }
  const seed = readSeed(join(runDir, "manifest.json"));
  return renderChart(builder(runDir, seed));
}
