import init, { Demo } from "./pkg/courtvec_wasm.js";

const $ = (id) => document.getElementById(id);
const ids = (id) => Uint32Array.from($(id).value.split(",").map((s) => s.trim()).filter(Boolean).map(Number));
const num = (id) => Number($(id).value);

let demo = null;

function fail(out, err) {
  out.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err.message ?? err);
  out.appendChild(p);
}

function build() {
  try {
    demo?.free();
    demo = new Demo(num("players"), num("seed"), num("shooter"), num("bias"));
    $("model-status").textContent = `ready (${num("players")} players)`;
  } catch (e) {
    demo = null;
    fail($("model-status"), e);
  }
}

function predict() {
  const out = $("predict-out");
  try {
    const rows = JSON.parse(demo.predict(ids("offense"), ids("defense")));
    out.innerHTML = "";
    for (const r of rows) {
      const bar = document.createElement("div");
      bar.className = "bar";
      bar.innerHTML = `<span class="label"></span><span class="fill"></span><span class="value"></span>`;
      bar.children[0].textContent = `${r.class}. ${r.label}`;
      bar.children[1].style.width = `${(r.probability * 400).toFixed(1)}px`;
      bar.children[2].textContent = (100 * r.probability).toFixed(2) + "%";
      out.appendChild(bar);
    }
  } catch (e) {
    fail(out, e);
  }
}

function simulate() {
  const out = $("simulate-out");
  try {
    const r = JSON.parse(demo.simulate(ids("offense"), ids("defense"), num("sims"), num("sim-seed")));
    out.textContent =
      `series won by A: ${(100 * r.team_a_series_win_fraction).toFixed(1)}%, ` +
      `score ${r.mean_series_score[0].toFixed(2)} vs. ${r.mean_series_score[1].toFixed(2)}, ` +
      `margin ${r.mean_margin.toFixed(2)} ± ${r.margin_std.toFixed(2)}, ` +
      `game win ${(100 * r.game_win_fraction_a).toFixed(1)}%`;
  } catch (e) {
    fail(out, e);
  }
}

function rank() {
  const out = $("rank-out");
  try {
    const fixed = ids("offense").slice(0, 4);
    const rows = JSON.parse(demo.rankFifth(fixed, ids("defense"), ids("candidates"), num("sims"), num("sim-seed")));
    const table = document.createElement("table");
    table.innerHTML = "<tr><th>candidate</th><th>win %</th><th>margin</th></tr>";
    for (const r of rows) {
      const tr = table.insertRow();
      tr.insertCell().textContent = r.candidate;
      tr.insertCell().textContent = (100 * r.game_win_fraction).toFixed(1);
      tr.insertCell().textContent = `${r.mean_margin.toFixed(2)} ± ${r.margin_std.toFixed(2)}`;
      tr.onclick = () => {
        const five = [...fixed, r.candidate];
        $("offense").value = five.join(",");
        predict();
      };
    }
    out.innerHTML = "";
    out.appendChild(table);
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("build").onclick = build;
$("predict").onclick = predict;
$("simulate").onclick = simulate;
$("rank").onclick = rank;
build();
predict();
