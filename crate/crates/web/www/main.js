import init, { geodesic, dimension, classCycles } from "./pkg/thinsieve_web.js";

const $ = (id) => document.getElementById(id);

function show(out, f) {
  out.classList.remove("err");
  try {
    return f();
  } catch (e) {
    out.textContent = String(e.message ?? e);
    out.classList.add("err");
  }
}

function drawArcs(canvas, arcs) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const lo = Math.min(...arcs.map((a) => a.x - a.r));
  const hi = Math.max(...arcs.map((a) => a.x + a.r));
  const top = Math.max(...arcs.map((a) => a.r));
  const pad = 20;
  const scale = Math.min((w - 2 * pad) / (hi - lo), (h - 2 * pad) / top);
  const X = (x) => pad + (x - lo) * scale;
  const base = h - pad;

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(0, base);
  ctx.lineTo(w, base);
  ctx.stroke();

  arcs.forEach((a, i) => {
    ctx.strokeStyle = `hsl(${(360 * i) / arcs.length}, 60%, 45%)`;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(X(a.x), base, a.r * scale, Math.PI, 2 * Math.PI);
    ctx.stroke();
  });
}

function runGeodesic(e) {
  e?.preventDefault();
  const out = $("geo-out");
  show(out, () => {
    const g = JSON.parse(geodesic($("geo-word").value));
    out.textContent =
      `D = ${g.discriminant}, max height = ${g.maxHeight.toFixed(6)}\n` +
      g.arcs.map((a) => `rotation ${a.rotation}: ${a.alpha}, center ${a.center}, radius ${a.r.toFixed(6)}`).join("\n");
    drawArcs($("geo-canvas"), g.arcs);
  });
}

function runDimension(e) {
  e?.preventDefault();
  const out = $("dim-out");
  out.textContent = "working...";
  // let the message paint before the computation blocks the thread
  setTimeout(() => show(out, () => {
    const d = JSON.parse(dimension(Number($("dim-alphabet").value), Number($("dim-depth").value)));
    out.textContent =
      `alphabet ${d.alphabet}, depth ${d.depth}\n` +
      `delta in [${d.lower.toFixed(6)}, ${d.upper.toFixed(6)}]\n` +
      `1 - 6/(pi^2 A) = ${d.asymptotic.toFixed(6)}`;
  }), 10);
}

function runClasses(e) {
  e?.preventDefault();
  const out = $("cls-out");
  const table = $("cls-table");
  table.innerHTML = "";
  show(out, () => {
    const c = JSON.parse(classCycles(Number($("cls-d").value)));
    out.textContent = `D = ${c.discriminant}: ${c.narrow} narrow, ${c.wide} wide classes`;
    const head = table.insertRow();
    for (const t of ["reduced form", "cycle length", "narrow cycles", "word"]) {
      head.appendChild(Object.assign(document.createElement("th"), { textContent: t }));
    }
    for (const k of c.classes) {
      const row = table.insertRow();
      for (const v of [k.key, k.length, k.narrowCycles, k.word.join(",")]) row.insertCell().textContent = v;
      row.style.cursor = "pointer";
      row.onclick = () => {
        $("geo-word").value = k.word.join(",");
        runGeodesic();
      };
    }
  });
}

await init();
$("geo-form").onsubmit = runGeodesic;
$("dim-form").onsubmit = runDimension;
$("cls-form").onsubmit = runClasses;
runGeodesic();
runClasses();
