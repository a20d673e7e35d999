import init, { horizon, planeWaveRow, supershiftRows, evolvePoint } from "./pkg/supershift_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "error" : "";
}

function potential() {
  return [$("kind").value, num("param")];
}

function xs() {
  const [x0, x1, n] = [num("x0"), num("x1"), num("count")];
  return Array.from({ length: n }, (_, i) => (n === 1 ? x0 : x0 + ((x1 - x0) * i) / (n - 1)));
}

// series: [{ label, values }], all sampled on xs()
function plot(series) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const x = xs();
  const all = series.flatMap((s) => s.values).filter(Number.isFinite);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-12) { lo -= 1; hi += 1; }
  const pad = 0.05 * (hi - lo);
  lo -= pad; hi += pad;
  const px = (v) => ((v - x[0]) / (x[x.length - 1] - x[0] || 1)) * (w - 40) + 30;
  const py = (v) => h - 20 - ((v - lo) / (hi - lo)) * (h - 30);

  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(30, py(0)); ctx.lineTo(w - 10, py(0));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "12px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, 12);
  ctx.fillText(lo.toPrecision(3), 2, h - 22);
  ctx.fillText(x[0].toString(), 30, h - 5);
  ctx.fillText(x[x.length - 1].toString(), w - 40, h - 5);

  $("legend").innerHTML = "";
  series.forEach((s, j) => {
    ctx.strokeStyle = COLORS[j % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.values.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
    $("legend").insertAdjacentHTML(
      "beforeend",
      `<span style="background:${COLORS[j % COLORS.length]}"></span>${s.label}`,
    );
  });
}

function timed(work) {
  status("computing…");
  // let the status paint before the solver blocks the thread
  setTimeout(() => {
    const start = performance.now();
    try {
      const note = work();
      status(`${note} (${((performance.now() - start) / 1000).toFixed(2)} s)`);
    } catch (e) {
      status(e.message ?? String(e), true);
    }
  }, 10);
}

function evolveRow() {
  timed(() => {
    const v = planeWaveRow(...potential(), num("k"), num("t"), num("x0"), num("x1"), num("count"));
    const re = [], im = [], abs = [];
    for (let i = 0; i < v.length; i += 2) {
      re.push(v[i]); im.push(v[i + 1]); abs.push(Math.hypot(v[i], v[i + 1]));
    }
    plot([{ label: "Re Ψ", values: re }, { label: "Im Ψ", values: im }, { label: "|Ψ|", values: abs }]);
    return `Ψ(t = ${num("t")}, ·) for e^{i${num("k")}x}`;
  });
}

function compare() {
  timed(() => {
    const v = supershiftRows(...potential(), num("n"), num("k"), num("t"), num("x0"), num("x1"), num("count"));
    const fn = [], target = [];
    let worst = 0;
    for (let i = 0; i < v.length; i += 4) {
      fn.push(v[i]); target.push(v[i + 2]);
      worst = Math.max(worst, Math.hypot(v[i] - v[i + 2], v[i + 1] - v[i + 3]));
    }
    plot([{ label: `Re Ψ(F_${num("n")})`, values: fn }, { label: "Re Ψ(e^{iκx})", values: target }]);
    return `max |Ψ(F_n) − Ψ(e^{iκx})| = ${worst.toExponential(3)}`;
  });
}

function single() {
  timed(() => {
    const [re, im, err] = evolvePoint(...potential(), num("k"), num("t"), 0);
    return `Ψ(${num("t")}, 0) = ${re.toPrecision(12)} ${im < 0 ? "−" : "+"} ${Math.abs(im).toPrecision(12)}i, error estimate ${err.toExponential(2)}`;
  });
}

function showHorizon() {
  try {
    const T = horizon(...potential());
    $("horizon").textContent = Number.isFinite(T) ? `t < ${T.toPrecision(6)}` : "all t > 0";
  } catch (e) {
    $("horizon").textContent = e.message ?? String(e);
  }
}

await init();
$("row").addEventListener("click", evolveRow);
$("shift").addEventListener("click", compare);
$("point").addEventListener("click", single);
$("kind").addEventListener("change", showHorizon);
$("param").addEventListener("input", showHorizon);
showHorizon();
evolveRow();
