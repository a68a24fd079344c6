import { ApiClient, ApiError } from "./api.ts";
import type { ViewModel } from "./model.ts";

function el<T extends HTMLElement>(root: Document, id: string): T {
  const node = root.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showInlineError(target: HTMLElement, error: unknown): void {
  target.textContent =
    error instanceof ApiError ? error.message : String(error ?? "request failed");
  target.classList.remove("hidden");
}

function clearInlineError(target: HTMLElement): void {
  target.textContent = "";
  target.classList.add("hidden");
}

/** Wire the control panel to the API; state flows back via the view model. */
export function bindControls(root: Document, client: ApiClient, vm: ViewModel): void {
  const chip = el<HTMLSpanElement>(root, "status-chip");
  const banner = el<HTMLDivElement>(root, "banner");
  const startBtn = el<HTMLButtonElement>(root, "btn-start");
  const pauseBtn = el<HTMLButtonElement>(root, "btn-pause");
  const resumeBtn = el<HTMLButtonElement>(root, "btn-resume");
  const seek = el<HTMLInputElement>(root, "seek");
  const seekError = el<HTMLSpanElement>(root, "seek-error");
  const speed = el<HTMLSelectElement>(root, "speed");
  const controlError = el<HTMLSpanElement>(root, "control-error");
  const variant = el<HTMLSelectElement>(root, "variant");
  const timeLabel = el<HTMLSpanElement>(root, "time-label");
  const form = el<HTMLFormElement>(root, "correction-form");
  const formError = el<HTMLSpanElement>(root, "correction-error");
  const intervalsLabel = el<HTMLSpanElement>(root, "intervals-label");

  const render = () => {
    chip.textContent = vm.status;
    chip.dataset.status = vm.status;
    banner.classList.toggle("hidden", vm.connected);
    if (!vm.connected) {
      banner.textContent = vm.lastError
        ? `disconnected: ${vm.lastError}`
        : "disconnected";
    }
    startBtn.disabled = !vm.connected || !(vm.status === "idle" || vm.status === "finished");
    pauseBtn.disabled = !vm.connected || vm.status !== "running";
    resumeBtn.disabled = !vm.connected || vm.status !== "paused";
    seek.disabled = !vm.connected || vm.status !== "paused";
    speed.disabled = !vm.connected;
    if (!seek.matches(":focus")) seek.value = String(vm.t_ms);
    timeLabel.textContent = `t = ${(vm.t_ms / 1000).toFixed(1)} s (${vm.activeVariant})`;
    intervalsLabel.textContent = vm.intervals.length
      ? `${vm.intervals.length} interval(s)`
      : "no intervals";
  };
  vm.onChange(render);
  render();

  const send = (cmd: string, args: Parameters<ApiClient["control"]>[1] = {}) => {
    clearInlineError(controlError);
    clearInlineError(seekError);
    return client
      .control(cmd, args)
      .then((snapshot) => vm.applyStatus(snapshot))
      .catch((error) => {
        showInlineError(cmd === "seek" ? seekError : controlError, error);
      });
  };

  startBtn.onclick = () => {
    vm.resetSeries();
    void send("start", { variant: variant.value });
  };
  pauseBtn.onclick = () => void send("pause");
  resumeBtn.onclick = () => void send("resume");
  speed.onchange = () => void send("set_speed", { speed: Number(speed.value) });
  seek.onchange = () => void send("seek", { t_ms: Number(seek.value) });

  form.onsubmit = (submitEvent) => {
    submitEvent.preventDefault();
    clearInlineError(formError);
    const value = (name: string) =>
      Number((form.elements.namedItem(name) as HTMLInputElement).value);
    client
      .correct({
        b_th_bps: value("b_th_kbps") * 1000,
        d_th_ms: value("d_th_ms"),
        t_th_ms: value("t_th_ms"),
        t_adj_ms: value("t_adj_ms"),
      })
      .then((body) => vm.setIntervals(body.intervals))
      .catch((error) => showInlineError(formError, error));
  };
}
