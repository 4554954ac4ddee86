// Built with: wasm-pack build crates/wasm --target web --out-dir www/pkg
import init, { wsr_curve, allocate, channel_pattern } from "./pkg/atwr_wasm.js";

const $ = (id) => document.getElementById(id);
const int = (id) => parseInt($(id).value, 10);
const num = (id) => parseFloat($(id).value);
const pair = (id) => $(id).value.split(",").map(Number);
const COLORS = { "bi-ct": "#1f77b4", "bi-cp": "#d62728", owr: "#2ca02c" };

function parseAxis(text) {
  const parts = text.split(":").map(Number);
  if (parts.length === 3) {
    const [a, b, step] = parts;
    const out = [];
    for (let v = a; v <= b + 1e-9; v += step) out.push(+v.toFixed(9));
    return out;
  }
  return text.split(",").map(Number);
}

function guard(errId, fn) {
  return () => {
    $(errId).textContent = "";
    try {
      fn();
    } catch (e) {
      $(errId).textContent = String(e.message || e);
    }
  };
}

function plotCurve(curve) {
  const cv = $("c-plot");
  const ctx = cv.getContext("2d");
  const pad = 45;
  ctx.clearRect(0, 0, cv.width, cv.height);
  const xs = Array.from(curve.axis);
  const series = curve.schemes.map((s) => [s, Array.from(curve.mean(s))]);
  const ymax = Math.max(...series.flatMap(([, v]) => v).filter(Number.isFinite)) * 1.1 || 1;
  const [x0, x1] = [xs[0], xs[xs.length - 1] === xs[0] ? xs[0] + 1 : xs[xs.length - 1]];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (cv.width - 2 * pad);
  const py = (y) => cv.height - pad - (y / ymax) * (cv.height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, cv.height - pad);
  ctx.lineTo(cv.width - pad / 2, cv.height - pad);
  ctx.stroke();
  xs.forEach((x) => ctx.fillText(String(x), px(x) - 6, cv.height - pad + 15));
  for (let k = 0; k <= 4; k++) {
    const y = (ymax * k) / 4;
    ctx.fillText(y.toFixed(1), 5, py(y) + 4);
  }
  ctx.fillText("SNR (dB)", cv.width / 2, cv.height - 8);
  ctx.fillText("bit/s/Hz", 5, 15);

  $("c-legend").innerHTML = "";
  for (const [name, ys] of series) {
    ctx.strokeStyle = COLORS[name];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
    const tag = document.createElement("span");
    tag.style.color = COLORS[name];
    tag.textContent = `■ ${name}`;
    $("c-legend").appendChild(tag);
  }
  ctx.lineWidth = 1;
}

function runCurve() {
  const [wu, wb] = pair("c-w");
  const curve = wsr_curve(int("c-n"), int("c-m"), num("c-snrb"), new Float64Array(parseAxis($("c-axis").value)),
    int("c-k"), BigInt(int("c-seed")), wu, wb, $("c-cond").checked);
  plotCurve(curve);
}

function runAllocate() {
  const [wu, wb] = pair("a-w");
  const a = allocate($("a-scheme").value, int("a-n"), int("a-m"), num("a-snru"), num("a-snrb"), wu, wb,
    BigInt(int("a-seed")), true);
  const row = (label, v) => `<tr><th>${label}</th>${Array.from(v).map((x) => `<td>${x.toFixed(4)}</td>`).join("")}</tr>`;
  $("a-out").innerHTML =
    `<table>${row("δ (to RUE)", a.delta_u)}${row("δ (to BS)", a.delta_b)}` +
    `${row("rate RUE", a.rates_u)}${row("rate BS", a.rates_b)}</table>` +
    `<p>WSR ${a.wsr.toFixed(4)} bit/s/Hz, relay power ${a.power.toFixed(4)}</p>`;
}

function runPattern() {
  const m = int("p-m");
  const p = channel_pattern($("p-scheme").value, int("p-n"), m, BigInt(int("p-seed")));
  const dim = 2 * m;
  const cv = $("p-heat");
  const ctx = cv.getContext("2d");
  const cell = cv.width / dim;
  for (let r = 0; r < dim; r++) {
    for (let c = 0; c < dim; c++) {
      const v = p[r * dim + c];
      // Map [1e-4, 1] onto a light-to-dark blue ramp.
      const t = v < 1e-10 ? -1 : Math.max(0, 1 + Math.log10(v) / 4);
      ctx.fillStyle = t < 0 ? "#000" : `hsl(215, 80%, ${92 - 60 * t}%)`;
      ctx.fillRect(c * cell, r * cell, cell - 1, cell - 1);
    }
  }
  ctx.strokeStyle = "#f80";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cv.width / 2, 0);
  ctx.lineTo(cv.width / 2, cv.height);
  ctx.moveTo(0, cv.height / 2);
  ctx.lineTo(cv.width, cv.height / 2);
  ctx.stroke();
}

await init();
$("c-run").onclick = guard("c-err", runCurve);
$("a-run").onclick = guard("a-err", runAllocate);
$("p-run").onclick = guard("p-err", runPattern);
guard("p-err", runPattern)();
