/** Minimal SVG line-chart builder: axes, line series, error bands, legend, caption. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  /** per-point standard error; drawn as a translucent band of +/- 2 stderr */
  stderr?: number[];
  color: string;
  dashed?: boolean;
  markers?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  caption: string;
  series: Series[];
  /** optional horizontal reference line */
  hline?: { y: number; label: string };
  yMin?: number;
  yMax?: number;
}

const W = 720;
const H = 480;
const M = { top: 44, right: 24, bottom: 86, left: 64 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return parseFloat(v.toPrecision(4)).toString();
}

/** round-ish tick positions covering [lo, hi] */
function ticks(lo: number, hi: number, n = 6): number[] {
  if (hi <= lo) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? mag * 10;
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push(Math.abs(t) < 1e-12 * span ? 0 : t);
  }
  return out;
}

export function renderChart(spec: ChartSpec): string {
  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s, _) =>
    s.stderr ? s.y.flatMap((v, i) => [v - 2 * s.stderr![i], v + 2 * s.stderr![i]]) : s.y
  );
  if (spec.hline) ys.push(spec.hline.y);
  let x0 = Math.min(...xs);
  let x1 = Math.max(...xs);
  let y0 = spec.yMin ?? Math.min(...ys);
  let y1 = spec.yMax ?? Math.max(...ys);
  if (x1 === x0) {
    x0 -= 1;
    x1 += 1;
  }
  if (y1 === y0) {
    y0 -= 1;
    y1 += 1;
  }
  const pad = 0.04 * (y1 - y0);
  if (spec.yMin === undefined) y0 -= pad;
  if (spec.yMax === undefined) y1 += pad;
  const px = (x: number) => M.left + ((x - x0) / (x1 - x0)) * (W - M.left - M.right);
  const py = (y: number) => H - M.bottom - ((y - y0) / (y1 - y0)) * (H - M.top - M.bottom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);

  for (const t of ticks(x0, x1)) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${M.top}" x2="${x}" y2="${H - M.bottom}" stroke="#eee"/>`);
    parts.push(
      `<text x="${x}" y="${H - M.bottom + 18}" font-size="11" text-anchor="middle" fill="#444">${fmt(t)}</text>`
    );
  }
  for (const t of ticks(y0, y1)) {
    const y = py(t);
    parts.push(`<line x1="${M.left}" y1="${y}" x2="${W - M.right}" y2="${y}" stroke="#eee"/>`);
    parts.push(
      `<text x="${M.left - 8}" y="${y + 4}" font-size="11" text-anchor="end" fill="#444">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<rect x="${M.left}" y="${M.top}" width="${W - M.left - M.right}" height="${H - M.top - M.bottom}" fill="none" stroke="#888"/>`
  );

  if (spec.hline) {
    const y = py(spec.hline.y);
    parts.push(
      `<line x1="${M.left}" y1="${y}" x2="${W - M.right}" y2="${y}" stroke="#999" stroke-dasharray="2 4"/>`
    );
    parts.push(
      `<text x="${W - M.right - 4}" y="${y - 5}" font-size="11" text-anchor="end" fill="#666">${esc(spec.hline.label)}</text>`
    );
  }

  for (const s of spec.series) {
    if (s.stderr) {
      const upper = s.x.map((x, i) => `${px(x)},${py(s.y[i] + 2 * s.stderr![i])}`);
      const lower = s.x.map((x, i) => `${px(x)},${py(s.y[i] - 2 * s.stderr![i])}`).reverse();
      parts.push(
        `<polygon points="${upper.concat(lower).join(" ")}" fill="${s.color}" fill-opacity="0.15"/>`
      );
    }
    const pts = s.x.map((x, i) => `${px(x)},${py(s.y[i])}`).join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(`<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    if (s.markers) {
      for (let i = 0; i < s.x.length; i++) {
        parts.push(`<circle cx="${px(s.x[i])}" cy="${py(s.y[i])}" r="2.6" fill="${s.color}"/>`);
      }
    }
  }

  let lx = M.left + 12;
  const ly = M.top + 14;
  for (const s of spec.series) {
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    parts.push(`<text x="${lx + 27}" y="${ly + 4}" font-size="12" fill="#222">${esc(s.label)}</text>`);
    lx += 27 + 7.2 * s.label.length + 24;
  }

  parts.push(
    `<text x="${W / 2}" y="${M.top - 18}" font-size="15" text-anchor="middle" fill="#111">${esc(spec.title)}</text>`
  );
  parts.push(
    `<text x="${(M.left + W - M.right) / 2}" y="${H - M.bottom + 38}" font-size="12" text-anchor="middle" fill="#222">${esc(spec.xLabel)}</text>`
  );
  parts.push(
    `<text x="18" y="${(M.top + H - M.bottom) / 2}" font-size="12" text-anchor="middle" fill="#222" transform="rotate(-90 18 ${(M.top + H - M.bottom) / 2})">${esc(spec.yLabel)}</text>`
  );
  parts.push(
    `<text x="${W / 2}" y="${H - 14}" font-size="11" text-anchor="middle" fill="#555">${esc(spec.caption)}</text>`
  );
  parts.push("</svg>");
  return parts.join("\n");
}
