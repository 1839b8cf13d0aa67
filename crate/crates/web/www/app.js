import init, { explore, convergence, Simulation } from "./pkg/caosr_web.js";

const BEHAVIORS = [
  "velocity_level",
  "node_availability",
  "inter_communication",
  "location_tracing",
  "resource_mapping_history",
];
const BELIEF_COLORS = { patron: "#2a9d4b", casual: "#d9a21b", slack: "#c4452f", vagrant: "#7a4fb0" };
const $ = (id) => document.getElementById(id);

function setupExplorer() {
  const box = $("sliders");
  for (const name of BEHAVIORS) {
    const label = document.createElement("label");
    label.innerHTML = `<input type="checkbox" checked> ${name} <input type="range" min="0" max="1" step="0.01" value="0.5"> <span></span>`;
    box.appendChild(label);
    label.querySelectorAll("input").forEach((i) => i.addEventListener("input", renderExplorer));
    label.dataset.behavior = name;
  }
  renderExplorer();
}

function renderExplorer() {
  const ratios = {};
  for (const label of $("sliders").children) {
    const [on, slider] = label.querySelectorAll("input");
    label.querySelector("span").textContent = Number(slider.value).toFixed(2);
    if (on.checked) ratios[label.dataset.behavior] = Number(slider.value);
  }
  let out;
  try {
    out = JSON.parse(explore(JSON.stringify(ratios)));
  } catch (e) {
    $("explore").innerHTML = `<tr><td>${e}</td></tr>`;
    return;
  }
  const rows = [];
  rows.push(`<tr><th colspan="2">behavior levels</th></tr>`);
  for (const [k, v] of Object.entries(out.levels)) rows.push(`<tr><td>${k}</td><td>${v}</td></tr>`);
  for (const [family, post] of Object.entries(out.observations)) {
    rows.push(`<tr><th colspan="2">${family} observations</th></tr>`);
    if (!post) {
      rows.push(`<tr><td colspan="2">no evidence</td></tr>`);
      continue;
    }
    for (const [k, p] of Object.entries(post)) rows.push(bar(k, p, out.favorable.includes(k)));
  }
  rows.push(`<tr><th colspan="2">belief ${out.class ?? "(no favorable observation)"}</th></tr>`);
  if (out.beliefs) for (const [k, p] of Object.entries(out.beliefs)) rows.push(bar(k, p, k === out.class));
  $("explore").innerHTML = rows.join("");
}

function bar(name, p, strong) {
  const w = Math.round(p * 160);
  const label = strong ? `<b>${name}</b>` : name;
  return `<tr><td>${label}</td><td><span class="bar" style="width:${w}px"></span> ${p.toFixed(3)}</td></tr>`;
}

let sim = null;
let playing = false;

function resetSim() {
  sim?.free();
  sim = new Simulation(Number($("nodes").value), Number($("seed").value), Number($("pause").value));
  drawSim();
}

function drawSim() {
  const state = JSON.parse(sim.state());
  const c = $("field");
  const g = c.getContext("2d");
  const sx = c.width / state.width;
  const sy = c.height / state.height;
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.beginPath();
  for (const [a, b] of state.contacts) {
    const na = state.nodes[a];
    const nb = state.nodes[b];
    g.moveTo(na.x * sx, na.y * sy);
    g.lineTo(nb.x * sx, nb.y * sy);
  }
  g.stroke();
  for (const n of state.nodes) {
    g.fillStyle = n.registered ? BELIEF_COLORS[n.belief] ?? "#555" : "#ddd";
    g.beginPath();
    g.arc(n.x * sx, n.y * sy, 3.5, 0, 2 * Math.PI);
    g.fill();
  }
  const m = JSON.parse(sim.metrics());
  const fmt = (v, d = 3) => (v == null ? "-" : Number(v).toFixed(d));
  const beliefs = m.beliefs ? m.beliefs.map((v) => fmt(v)).join(" / ") : "-";
  $("metrics").textContent =
    `t = ${fmt(m.t, 2)} s\n` +
    `N_DC ${m.N_DC}  N_OC ${m.N_OC}  N_hom ${m.N_hom}  N_het ${m.N_het}\n` +
    `P_OC ${fmt(m.P_OC)}   xi_RA ${fmt(m.xi_RA)} /ms\n` +
    `mean T_bf ${fmt(m.mean_T_bf, 2)} ms   mean T_tot ${fmt(m.mean_T_tot, 2)} ms\n` +
    `failures ${fmt(m.failure_pct, 1)} %\n` +
    `patron / casual / slack / vagrant\n${beliefs}`;
}

function loop() {
  if (!playing) return;
  const more = sim.step(4);
  drawSim();
  if (!more) {
    playing = false;
    $("play").textContent = "play";
    return;
  }
  requestAnimationFrame(loop);
}

function renderCurve() {
  const nd = Number($("nd").value);
  const tick = Number($("tick").value);
  $("nd-v").textContent = nd;
  $("tick-v").textContent = tick;
  const pts = JSON.parse(convergence(nd, tick, 150, 5));
  const c = $("curve");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 30;
  const ymax = Math.max(...pts.map((p) => p[1]));
  const x = (v) => pad + (v / 150) * (c.width - 2 * pad);
  const y = (v) => c.height - pad - (v / ymax) * (c.height - 2 * pad);
  g.strokeStyle = "#333";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  g.fillStyle = "#333";
  g.fillText("pause (ms)", c.width / 2 - 20, c.height - 8);
  g.fillText(`xi_RA max ${ymax.toFixed(2)}`, pad + 4, pad - 8);
  g.strokeStyle = "#4a7bd0";
  g.beginPath();
  pts.forEach(([p, v], i) => (i ? g.lineTo(x(p), y(v)) : g.moveTo(x(p), y(v))));
  g.stroke();
}

await init();
setupExplorer();
resetSim();
renderCurve();
$("reset").addEventListener("click", resetSim);
$("play").addEventListener("click", () => {
  playing = !playing;
  $("play").textContent = playing ? "pause" : "play";
  loop();
});
$("nd").addEventListener("input", renderCurve);
$("tick").addEventListener("input", renderCurve);
