import init, { ml_curves, family_vs_reference, heatmap } from "./pkg/ab_resolvent_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);

function guard(errId, f) {
  try {
    f();
    $(errId).textContent = "";
  } catch (e) {
    $(errId).textContent = String(e.message ?? e);
  }
}

// series: array of arrays of [x, y]; both axes logarithmic
function loglog(canvas, series, labels) {
  const g = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, P = 40;
  g.clearRect(0, 0, W, H);
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) for (const [x, y] of s) {
    if (!(x > 0 && y > 0)) continue;
    x0 = Math.min(x0, Math.log10(x)); x1 = Math.max(x1, Math.log10(x));
    y0 = Math.min(y0, Math.log10(y)); y1 = Math.max(y1, Math.log10(y));
  }
  if (!(x1 > x0)) return;
  if (!(y1 > y0)) y1 = y0 + 1;
  const px = (x) => P + (Math.log10(x) - x0) / (x1 - x0) * (W - 2 * P);
  const py = (y) => H - P - (Math.log10(y) - y0) / (y1 - y0) * (H - 2 * P);
  g.strokeStyle = "#888";
  g.strokeRect(P, P, W - 2 * P, H - 2 * P);
  g.fillStyle = "#444";
  g.font = "11px sans-serif";
  g.fillText(`t = 1e${x0.toFixed(1)}`, P, H - P + 14);
  g.fillText(`1e${x1.toFixed(1)}`, W - P - 30, H - P + 14);
  g.fillText(`1e${y1.toFixed(1)}`, 2, P + 4);
  g.fillText(`1e${y0.toFixed(1)}`, 2, H - P);
  series.forEach((s, k) => {
    g.strokeStyle = COLORS[k % COLORS.length];
    g.beginPath();
    let started = false;
    for (const [x, y] of s) {
      if (!(x > 0 && y > 0)) { started = false; continue; }
      if (started) g.lineTo(px(x), py(y)); else g.moveTo(px(x), py(y));
      started = true;
    }
    g.stroke();
    g.fillStyle = COLORS[k % COLORS.length];
    g.fillText(labels[k], W - P - 120, P + 14 + 14 * k);
  });
}

function drawMl() {
  const a = +$("ml-alpha").value, b = +$("ml-beta").value;
  $("ml-alpha-v").textContent = a.toFixed(2);
  $("ml-beta-v").textContent = b.toFixed(2);
  guard("ml-err", () => {
    const lambdas = $("ml-lambdas").value.split(",").map(Number);
    const flat = ml_curves(a, b, new Float64Array(lambdas), 1e-3, 1e3, 300);
    const stride = lambdas.length + 1;
    const series = lambdas.map((_, j) => {
      const s = [];
      for (let i = 0; i < flat.length; i += stride) s.push([flat[i], flat[i + 1 + j]]);
      return s;
    });
    loglog($("ml-plot"), series, lambdas.map((l) => `lambda = ${l}`));
  });
}

function drawFamily() {
  guard("vf-err", () => {
    const flat = family_vs_reference(+$("vf-alpha").value, +$("vf-beta").value, +$("vf-c").value, 1e-3, 1e3, 120);
    const ml = [], v = [];
    for (let i = 0; i < flat.length; i += 3) {
      ml.push([flat[i], Math.abs(flat[i + 1])]);
      v.push([flat[i], Math.abs(flat[i + 2])]);
    }
    loglog($("vf-plot"), [ml, v], ["|E(-t^a)|", "|V(t)|"]);
  });
}

function drawHeatmap() {
  guard("hm-err", () => {
    const nt = 180, nx = 64;
    const u = heatmap(0.8, 1.2, +$("hm-modes").value, $("hm-datum").value, +$("hm-tmax").value, nt, nx);
    const canvas = $("hm-plot");
    const g = canvas.getContext("2d");
    const img = g.createImageData(nt, nx);
    const scale = u.reduce((m, x) => Math.max(m, Math.abs(x)), 1e-300);
    for (let i = 0; i < nt; i++) for (let j = 0; j < nx; j++) {
      const f = u[i * nx + j] / scale;
      const k = 4 * ((nx - 1 - j) * nt + i);
      img.data[k] = f >= 0 ? 255 : 255 * (1 + f);
      img.data[k + 1] = 255 * (1 - Math.abs(f));
      img.data[k + 2] = f >= 0 ? 255 * (1 - f) : 255;
      img.data[k + 3] = 255;
    }
    const tmp = new OffscreenCanvas(nt, nx);
    tmp.getContext("2d").putImageData(img, 0, 0);
    g.imageSmoothingEnabled = false;
    g.clearRect(0, 0, canvas.width, canvas.height);
    g.drawImage(tmp, 0, 0, canvas.width, canvas.height);
  });
}

await init();
for (const id of ["ml-alpha", "ml-beta", "ml-lambdas"]) $(id).addEventListener("input", drawMl);
$("vf-run").addEventListener("click", drawFamily);
$("hm-run").addEventListener("click", drawHeatmap);
drawMl();
drawFamily();
drawHeatmap();
