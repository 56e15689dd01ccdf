import init, { Demo } from "./pkg/mpi_web_demo.js";

const $ = (id) => document.getElementById(id);
const canvas = $("view");
const ctx = canvas.getContext("2d");
let demo;
let seed = 1;

function mode() {
  return document.querySelector("input[name=mode]:checked").value;
}

function draw() {
  const lateral = Number($("lateral").value);
  const forward = Number($("forward").value);
  $("lateral-v").textContent = lateral.toFixed(2);
  $("forward-v").textContent = forward.toFixed(2);
  try {
    const m = mode();
    const rgba = m === "depth" ? demo.depth() : demo.render(lateral, forward, m === "labels");
    const img = new ImageData(new Uint8ClampedArray(rgba), demo.width(), demo.height());
    ctx.putImageData(img, 0, 0);
    $("status").textContent = "";
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function load() {
  if (demo) demo.free();
  demo = new Demo(seed++);
  canvas.width = demo.width();
  canvas.height = demo.height();
  const layer = $("layer");
  layer.innerHTML = "";
  for (let j = 0; j < demo.num_layers(); j++) {
    layer.add(new Option(j === 0 ? "0 (visible surface)" : String(j), j));
  }
  $("label").max = demo.num_labels() - 1;
  draw();
}

function toPixel(ev) {
  const r = canvas.getBoundingClientRect();
  return [
    Math.floor(((ev.clientX - r.left) / r.width) * canvas.width),
    Math.floor(((ev.clientY - r.top) / r.height) * canvas.height),
  ];
}

let start = null;
canvas.addEventListener("mousedown", (ev) => { start = toPixel(ev); });
canvas.addEventListener("mouseup", (ev) => {
  if (!start) return;
  const end = toPixel(ev);
  const clamp = (v, hi) => Math.max(0, Math.min(hi, v));
  const x0 = clamp(Math.min(start[0], end[0]), canvas.width - 1);
  const y0 = clamp(Math.min(start[1], end[1]), canvas.height - 1);
  const x1 = clamp(Math.max(start[0], end[0]), canvas.width - 1);
  const y1 = clamp(Math.max(start[1], end[1]), canvas.height - 1);
  start = null;
  const erase = document.querySelector("input[name=op]:checked").value === "remove";
  try {
    demo.edit(Number($("layer").value), x0, y0, x1 - x0 + 1, y1 - y0 + 1, Number($("label").value), erase);
    draw();
  } catch (e) {
    $("status").textContent = String(e);
  }
});

for (const el of document.querySelectorAll("input")) el.addEventListener("input", draw);
$("reset").addEventListener("click", load);

await init();
load();
