import init, { simulate, riskGrid, missionProbability } from "./pkg/gauntlet_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("field");
const ctx = canvas.getContext("2d");
const GRID = [121, 61];
const ACP_COLORS = ["#1f6fd1", "#2a9d4b", "#c77d00"];

let sim = null;
let heat = null;

function toCanvas(field, x, y) {
  const [x0, x1, y0, y1] = field;
  return [((x - x0) / (x1 - x0)) * canvas.width, (1 - (y - y0) / (y1 - y0)) * canvas.height];
}

function showError(e) {
  $("status").innerHTML = `<span class="err">${e.message ?? e}</span>`;
}

function runScenario() {
  try {
    sim = JSON.parse(simulate($("config").value, $("case").value));
  } catch (e) {
    sim = null;
    showError(e);
    return;
  }
  $("time").max = sim.steps - 1;
  $("time").value = 0;
  $("status").textContent = sim.events.map((e) => `${e.kind} acp ${e.acp} at t=${e.t.toFixed(2)}`).join(", ");
  const m = sim.metrics;
  $("metrics").textContent =
    `outcome ${m.outcome}, J_WEZ ${m.j_wez.toFixed(3)}, V_WEZ ${m.v_wez.toFixed(3)}, m_team ${m.m_team.toFixed(3)}\n` +
    m.per_acp
      .map((a) => `  ${a.role}: ${a.outcome}, peak p ${a.peak_risk.toFixed(3)}, path ${a.path_length.toFixed(2)} m`)
      .join("\n");
  updateHeat();
}

function updateHeat() {
  if (!sim) return;
  const k = Number($("time").value);
  $("tlabel").textContent = (k * sim.dt).toFixed(2);
  heat = null;
  if ($("heat").checked) {
    try {
      heat = JSON.parse(riskGrid($("config").value, $("case").value, k * sim.dt, GRID[0], GRID[1]));
    } catch (e) {
      showError(e);
    }
  }
  draw(k);
}

function drawHeat() {
  const { nx, ny, values, epsilon } = heat;
  const cw = canvas.width / nx;
  const ch = canvas.height / ny;
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const p = values[iy * nx + ix];
      if (p < 0.02) continue;
      const hot = p >= epsilon;
      ctx.fillStyle = `rgba(${hot ? 220 : 240}, ${hot ? 40 : 160}, 40, ${Math.min(p, 1) * 0.6})`;
      ctx.fillRect(ix * cw, canvas.height - (iy + 1) * ch, cw + 1, ch + 1);
    }
  }
}

function draw(k) {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (heat) drawHeat();
  sim.tracks.forEach((tr, i) => {
    const isAcp = i < sim.n_acps;
    const color = isAcp ? ACP_COLORS[i % ACP_COLORS.length] : "#a00";
    ctx.strokeStyle = color;
    ctx.lineWidth = isAcp ? 2 : 1;
    ctx.setLineDash(isAcp ? [] : [4, 3]);
    ctx.beginPath();
    tr.poses.slice(0, k + 1).forEach(([x, y], s) => {
      const [cx, cy] = toCanvas(sim.field, x, y);
      s === 0 ? ctx.moveTo(cx, cy) : ctx.lineTo(cx, cy);
    });
    ctx.stroke();
    ctx.setLineDash([]);
    if (tr.goal) {
      const [gx, gy] = toCanvas(sim.field, ...tr.goal);
      ctx.strokeRect(gx - 5, gy - 5, 10, 10);
    }
    const [x, y, psi] = tr.poses[Math.min(k, tr.poses.length - 1)];
    const [cx, cy] = toCanvas(sim.field, x, y);
    const gone = tr.ended_at !== null && k >= tr.ended_at;
    ctx.save();
    ctx.translate(cx, cy);
    ctx.rotate(-psi);
    ctx.fillStyle = gone ? "#888" : color;
    ctx.beginPath();
    ctx.moveTo(9, 0);
    ctx.lineTo(-6, 5);
    ctx.lineTo(-6, -5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  });
}

function computeMission() {
  try {
    const r = JSON.parse(
      missionProbability(Number($("p").value), Number($("n").value), Number($("k").value), Number($("m").value)),
    );
    $("mission").textContent =
      `P_mission = 1 - (1 - p)^n = ${r.p_mission.toFixed(6)}\n` +
      `by roster size: ${r.curve.map((v, i) => `n=${i + 1}: ${v.toFixed(4)}`).join(", ")}\n` +
      `observed ${r.p_empirical.toFixed(3)} +/- ${r.ci_half_width.toFixed(3)} (95% Wald)`;
  } catch (e) {
    $("mission").textContent = e.message ?? String(e);
  }
}

await init();
$("run").addEventListener("click", runScenario);
$("case").addEventListener("change", runScenario);
$("time").addEventListener("input", () => {
  if (!sim) return;
  const k = Number($("time").value);
  $("tlabel").textContent = (k * sim.dt).toFixed(2);
  draw(k);
});
// the risk field reruns the scenario, so refresh it only when the slider is released
$("time").addEventListener("change", updateHeat);
$("heat").addEventListener("change", updateHeat);
$("calc").addEventListener("click", computeMission);
runScenario();
computeMission();
