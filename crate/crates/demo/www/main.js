import init, { domain_mask, sample_points, fit_error_map } from "./pkg/irregular_wls_demo.js";

const RES = 200;
const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const report = document.getElementById("report");

const value = (id) => document.getElementById(id).value;

// grid rows run bottom to top, the canvas top to bottom
function paint(colourAt) {
  const img = ctx.createImageData(RES, RES);
  for (let j = 0; j < RES; j++) {
    for (let i = 0; i < RES; i++) {
      const [r, g, b] = colourAt(j * RES + i);
      const p = 4 * ((RES - 1 - j) * RES + i);
      img.data[p] = r;
      img.data[p + 1] = g;
      img.data[p + 2] = b;
      img.data[p + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

const OUTSIDE = [20, 30, 90];

function showMask() {
  const mask = domain_mask(value("domain"), RES);
  paint((k) => (mask[k] ? [235, 225, 170] : OUTSIDE));
  const inside = mask.reduce((a, v) => a + v, 0);
  report.textContent = `domain: ${value("domain")}\ngrid cells inside: ${inside} of ${RES * RES}`;
}

function showSamples() {
  showMask();
  const pts = sample_points(value("domain"), 2000, BigInt(value("seed")));
  ctx.fillStyle = "#c00";
  for (let k = 0; k < pts.length; k += 2) {
    const x = ((pts[k] + 1) / 2) * (RES - 1);
    const y = (1 - (pts[k + 1] + 1) / 2) * (RES - 1);
    ctx.fillRect(x, y, 1, 1);
  }
  report.textContent += `\nuniform points: ${pts.length / 2}`;
}

// log10 error in [-16, 0] mapped from blue to yellow
function heat(v) {
  const t = Math.min(1, Math.max(0, (v + 16) / 16));
  return [Math.round(255 * t), Math.round(200 * t + 40 * (1 - t)), Math.round(255 * (1 - t))];
}

function runFit() {
  report.textContent = "fitting…";
  setTimeout(() => {
    const t0 = performance.now();
    const r = fit_error_map(
      value("domain"), value("function"), value("family"),
      Number(value("order")), Number(value("theta")), value("algorithm"),
      BigInt(value("seed")), RES,
    );
    const errors = r.errors;
    paint((k) => (Number.isNaN(errors[k]) ? OUTSIDE : heat(errors[k])));
    report.textContent = [
      `status: ${r.status}`,
      `n: ${r.n}   m: ${r.m}   m̃: ${r.m_tilde}`,
      `ε: ${r.epsilon.toExponential(2)}`,
      `κ: ${r.kappa.toFixed(3)}`,
      `CV error: ${r.cv_error.toExponential(3)}`,
      `max grid error: ${r.max_error.toExponential(3)}`,
      `time: ${(performance.now() - t0).toFixed(0)} ms`,
    ].join("\n");
    r.free();
  }, 10);
}

function guard(f) {
  return () => {
    try {
      f();
    } catch (e) {
      report.textContent = `error: ${e.message ?? e}`;
    }
  };
}

await init();
document.getElementById("show-mask").onclick = guard(showMask);
document.getElementById("show-samples").onclick = guard(showSamples);
document.getElementById("run-fit").onclick = guard(runFit);
guard(showMask)();
