/** Canvas rendering: price segments, belief bands with draggable edges,
 * and strategy volume bars. No charting dependency; the data is tiny. */

export interface BandEditCallback {
  (which: "min" | "max", value: number): void;
}

interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

const M: Margins = { left: 46, right: 10, top: 10, bottom: 20 };

function scales(
  canvas: HTMLCanvasElement,
  n: number,
  lo: number,
  hi: number,
): { x: (i: number) => number; y: (v: number) => number; invY: (py: number) => number } {
  const w = canvas.width - M.left - M.right;
  const h = canvas.height - M.top - M.bottom;
  const span = hi - lo || 1;
  return {
    x: (i) => M.left + (n <= 1 ? 0 : (i / (n - 1)) * w),
    y: (v) => M.top + (1 - (v - lo) / span) * h,
    invY: (py) => lo + (1 - (py - M.top) / h) * span,
  };
}

export interface PriceChartOptions {
  prices: number[];
  band?: { min: number; max: number };
  onBandEdit?: BandEditCallback;
}

/** Draw a price line; when a band is given, shade it and wire edge drags. */
export function renderPriceChart(canvas: HTMLCanvasElement, opts: PriceChartOptions): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { prices, band } = opts;
  const values = [...prices];
  if (band) values.push(band.min, band.max);
  const lo = Math.min(...values) * 0.98;
  const hi = Math.max(...values) * 1.02;
  const s = scales(canvas, prices.length, lo, hi);

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (band) {
    ctx.fillStyle = "rgba(70, 130, 180, 0.15)";
    const yTop = s.y(band.max);
    const yBot = s.y(band.min);
    ctx.fillRect(M.left, yTop, canvas.width - M.left - M.right, yBot - yTop);
    ctx.strokeStyle = "steelblue";
    ctx.setLineDash([4, 3]);
    for (const edge of [band.min, band.max]) {
      ctx.beginPath();
      ctx.moveTo(M.left, s.y(edge));
      ctx.lineTo(canvas.width - M.right, s.y(edge));
      ctx.stroke();
    }
    ctx.setLineDash([]);
  }

  ctx.strokeStyle = "#233";
  ctx.lineWidth = 1.4;
  ctx.beginPath();
  prices.forEach((p, i) => {
    const px = s.x(i);
    const py = s.y(p);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();

  // y-axis labels
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (const v of [lo, (lo + hi) / 2, hi]) {
    ctx.fillText(v.toFixed(1), 4, s.y(v) + 4);
  }

  if (band && opts.onBandEdit) {
    attachBandDrag(canvas, () => scales(canvas, prices.length, lo, hi), band, opts.onBandEdit);
  }
}

function attachBandDrag(
  canvas: HTMLCanvasElement,
  makeScales: () => ReturnType<typeof scales>,
  band: { min: number; max: number },
  onEdit: BandEditCallback,
): void {
  let dragging: "min" | "max" | null = null;
  const HIT = 6;

  const pick = (py: number): "min" | "max" | null => {
    const s = makeScales();
    if (Math.abs(py - s.y(band.max)) <= HIT) return "max";
    if (Math.abs(py - s.y(band.min)) <= HIT) return "min";
    return null;
  };

  canvas.onpointerdown = (ev) => {
    const rect = canvas.getBoundingClientRect();
    dragging = pick(ev.clientY - rect.top);
    if (dragging) canvas.setPointerCapture(ev.pointerId);
  };
  canvas.onpointermove = (ev) => {
    const rect = canvas.getBoundingClientRect();
    const py = ev.clientY - rect.top;
    canvas.style.cursor = dragging || pick(py) ? "ns-resize" : "default";
    if (!dragging) return;
    const s = makeScales();
    const value = Math.max(0, s.invY(py));
    onEdit(dragging, Math.round(value * 100) / 100);
  };
  canvas.onpointerup = () => {
    dragging = null;
  };
}

/** Horizontal bars for chosen volumes: buys green, shorts/borrows red. */
export function renderStrategyBars(
  canvas: HTMLCanvasElement,
  rows: { label: string; volume: number; kind: "buy" | "short" }[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (rows.length === 0) {
    ctx.fillStyle = "#777";
    ctx.font = "12px sans-serif";
    ctx.fillText("no volumes", 10, 20);
    return;
  }
  const maxVol = Math.max(...rows.map((r) => Math.abs(r.volume)), 1);
  const rowH = Math.min(26, (canvas.height - 10) / rows.length);
  rows.forEach((r, i) => {
    const y = 6 + i * rowH;
    const w = (Math.abs(r.volume) / maxVol) * (canvas.width - 150);
    ctx.fillStyle = r.kind === "buy" ? "#2e8b57" : "#c0504d";
    ctx.fillRect(120, y, w, rowH - 6);
    ctx.fillStyle = "#222";
    ctx.font = "12px sans-serif";
    ctx.fillText(r.label, 6, y + rowH - 12);
    ctx.fillText(String(r.volume), 126 + w, y + rowH - 12);
  });
}
