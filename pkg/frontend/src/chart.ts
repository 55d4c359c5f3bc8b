import { formatInterval, formatTime } from "./format.js";
import type { IntervalPayload, PredictResponse } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartOptions {
  /** Support limit of the model (largest observed failure time); used to
   * annotate capped upper endpoints. */
  readonly eta?: number;
  readonly width?: number;
  readonly rowHeight?: number;
}

interface Layout {
  readonly width: number;
  readonly rowHeight: number;
  readonly labelWidth: number;
  readonly margin: number;
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

function scenarioLabel(interval: IntervalPayload): string {
  return interval.scenario ?? "base profile";
}

function axisMaximum(intervals: readonly IntervalPayload[], eta?: number): number {
  let max = eta ?? 0;
  for (const iv of intervals) {
    max = Math.max(max, iv.lower, iv.upper ?? iv.lower);
  }
  return max > 0 ? 1.05 * max : 1;
}

/**
 * Horizontal interval comparison: one bar per scenario spanning
 * [lower, upper]. Capped uppers get an open (arrow) end and an eta
 * annotation; zero-width intervals render as a point marker. Endpoint labels
 * come straight from the response values through the shared formatter.
 */
export function renderComparison(
  container: HTMLElement,
  response: PredictResponse,
  options: ChartOptions = {},
): void {
  const layout: Layout = {
    width: options.width ?? 720,
    rowHeight: options.rowHeight ?? 34,
    labelWidth: 150,
    margin: 12,
  };
  const intervals = response.intervals;
  const axisHeight = 28;
  const height = layout.margin * 2 + intervals.length * layout.rowHeight + axisHeight;
  const plotLeft = layout.labelWidth;
  const plotWidth = layout.width - plotLeft - layout.margin;
  const xMax = axisMaximum(intervals, options.eta);
  const xPixel = (t: number): number => plotLeft + (plotWidth * t) / xMax;

  container.textContent = "";
  const svg = svgElement("svg", {
    width: String(layout.width),
    height: String(height),
    viewBox: `0 0 ${layout.width} ${height}`,
    role: "img",
    "data-testid": "interval-chart",
  });

  intervals.forEach((interval, index) => {
    const y = layout.margin + index * layout.rowHeight + layout.rowHeight / 2;
    const row = svgElement("g", { "data-testid": "interval-row" });
    row.dataset.scenario = scenarioLabel(interval);
    row.dataset.lower = formatTime(interval.lower);
    if (interval.upper !== null) {
      row.dataset.upper = formatTime(interval.upper);
    }
    row.dataset.capped = String(interval.capped);

    const label = svgElement("text", {
      x: String(layout.margin),
      y: String(y + 4),
      class: "scenario-label",
    });
    label.textContent = scenarioLabel(interval);
    row.appendChild(label);

    const x0 = xPixel(interval.lower);
    const upper = interval.upper;
    if (upper !== null && upper === interval.lower) {
      // Degenerate (alpha = 1) interval: a point, not a bar.
      row.appendChild(
        svgElement("circle", {
          cx: String(x0),
          cy: String(y),
          r: "5",
          class: "interval-point",
          "data-testid": "point-marker",
        }),
      );
    } else {
      const x1 = upper === null ? plotLeft + plotWidth : xPixel(upper);
      row.appendChild(
        svgElement("line", {
          x1: String(x0),
          y1: String(y),
          x2: String(x1),
          y2: String(y),
          class: "interval-bar",
          "stroke-width": "6",
          stroke: "currentColor",
        }),
      );
      row.appendChild(
        svgElement("line", {
          x1: String(x0),
          y1: String(y - 7),
          x2: String(x0),
          y2: String(y + 7),
          stroke: "currentColor",
          "stroke-width": "2",
        }),
      );
      if (interval.capped || upper === null) {
        // Open end: arrow head instead of a closing tick.
        row.appendChild(
          svgElement("path", {
            d: `M ${x1} ${y} l -9 -5 v 10 z`,
            class: "open-end",
            fill: "currentColor",
            "data-testid": "open-end",
          }),
        );
        if (interval.capped && options.eta !== undefined) {
          const etaNote = svgElement("text", {
            x: String(x1),
            y: String(y - 10),
            "text-anchor": "end",
            class: "eta-annotation",
            "data-testid": "eta-annotation",
          });
          etaNote.textContent = `η = ${formatTime(options.eta)}`;
          row.appendChild(etaNote);
        }
      } else {
        row.appendChild(
          svgElement("line", {
            x1: String(x1),
            y1: String(y - 7),
            x2: String(x1),
            y2: String(y + 7),
            stroke: "currentColor",
            "stroke-width": "2",
          }),
        );
      }
    }

    const endpoints = svgElement("text", {
      x: String(layout.width - layout.margin),
      y: String(y + 4),
      "text-anchor": "end",
      class: "endpoint-label",
      "data-testid": "endpoint-label",
    });
    endpoints.textContent = formatInterval(interval.lower, interval.upper, interval.capped);
    row.appendChild(endpoints);
    svg.appendChild(row);
  });

  const axisY = layout.margin + intervals.length * layout.rowHeight + 8;
  const axis = svgElement("g", { "data-testid": "axis" });
  axis.appendChild(
    svgElement("line", {
      x1: String(plotLeft),
      y1: String(axisY),
      x2: String(plotLeft + plotWidth),
      y2: String(axisY),
      stroke: "currentColor",
    }),
  );
  const tickCount = 5;
  for (let i = 0; i <= tickCount; i += 1) {
    const t = (xMax * i) / tickCount;
    const x = xPixel(t);
    axis.appendChild(
      svgElement("line", {
        x1: String(x),
        y1: String(axisY),
        x2: String(x),
        y2: String(axisY + 4),
        stroke: "currentColor",
      }),
    );
    const tick = svgElement("text", {
      x: String(x),
      y: String(axisY + 16),
      "text-anchor": "middle",
      class: "tick-label",
    });
    tick.textContent = formatTime(t);
    axis.appendChild(tick);
  }
  svg.appendChild(axis);
  container.appendChild(svg);

  const caption = document.createElement("p");
  caption.className = "chart-caption";
  caption.dataset.testid = "chart-caption";
  const conditioning =
    response.c_L > 0 ? `, given survival past ${formatTime(response.c_L)}` : "";
  caption.textContent =
    `Two-sided ${Math.round((1 - response.alpha) * 100)}% intervals for the ` +
    `survival time (training-data time units)${conditioning}.`;
  container.appendChild(caption);
}
