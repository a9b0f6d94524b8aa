import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExplorerController } from "../src/state.js";
import { makeFakeService } from "./fake.js";

async function makeController(seed = 7) {
  const fake = makeFakeService(seed);
  const api = new ApiClient(fake.fetchFn);
  const controller = new ExplorerController(api, fake.metadata, "session-test");
  await controller.init();
  fake.resetCounters();
  return { fake, controller };
}

describe("initial state", () => {
  it("starts at threshold 0.5 with the unweighted model", async () => {
    const { controller } = await makeController();
    const state = controller.getState();
    expect(state.threshold).toBe(0.5);
    expect(state.selectedModel).toBe("m005");
    expect(state.evaluation?.model_id).toBe("m005");
    expect(state.attribute).toBeNull();
  });
});

describe("threshold control", () => {
  it("snaps to the served grid", async () => {
    const { controller } = await makeController();
    expect(controller.snapThreshold(0.47)).toBe(0.45);
    expect(controller.snapThreshold(0.48)).toBe(0.5);
    expect(controller.snapThreshold(-3)).toBe(0);
  });

  it("issues exactly one fetch per slider change", async () => {
    const { fake, controller } = await makeController();
    await controller.setThreshold(0.45);
    expect(fake.counters.evaluation).toBe(1);
    expect(fake.counters.frontier).toBe(0);
    expect(controller.getState().evaluation?.threshold).toBe(0.45);
  });

  it("does nothing when the snapped value is unchanged", async () => {
    const { fake, controller } = await makeController();
    await controller.setThreshold(0.5);
    expect(fake.counters.evaluation).toBe(0);
  });

  it("discards stale responses when changes race", async () => {
    const fake = makeFakeService();
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const slowFetch = async (url: string, init?: RequestInit) => {
      if (url.includes("threshold=0.25")) await gate;
      return fake.fetchFn(url, init);
    };
    const controller = new ExplorerController(
      new ApiClient(slowFetch),
      fake.metadata,
      "session-race",
    );
    await controller.init();
    const slow = controller.setThreshold(0.25);
    await controller.setThreshold(0.75);
    release!();
    await slow;
    expect(controller.getState().threshold).toBe(0.75);
    expect(controller.getState().evaluation?.threshold).toBe(0.75);
  });
});

describe("attribute control", () => {
  it("loads the frontier cache once and keeps slider moves at one fetch", async () => {
    const { fake, controller } = await makeController();
    await controller.setAttribute("race");
    expect(fake.counters.frontier).toBe(21);
    expect(fake.counters.evaluation).toBe(1);
    expect(controller.getState().frontier).not.toBeNull();

    fake.resetCounters();
    await controller.setThreshold(0.45);
    expect(fake.counters.frontier).toBe(0);
    expect(fake.counters.evaluation).toBe(1);
  });

  it("keeps the selected model on the displayed frontier", async () => {
    const { controller } = await makeController();
    await controller.setAttribute("race");
    for (const t of [0.3, 0.45, 0.7]) {
      await controller.setThreshold(t);
      const state = controller.getState();
      expect(state.frontier!.points.some((p) => p.model_id === state.selectedModel)).toBe(true);
    }
  });

  it("falls back to the unweighted model when deselected", async () => {
    const { controller } = await makeController();
    await controller.setAttribute("race");
    await controller.setAttribute(null);
    const state = controller.getState();
    expect(state.selectedModel).toBe("m005");
    expect(state.frontier).toBeNull();
    expect(state.evaluation?.by_group).toBeUndefined();
  });
});

describe("model selection", () => {
  it("a Pareto click triggers exactly one fetch", async () => {
    const { fake, controller } = await makeController();
    await controller.setAttribute("race");
    fake.resetCounters();
    const target = controller
      .getState()
      .frontier!.points.find((p) => p.model_id !== controller.getState().selectedModel)!;
    await controller.selectModel(target.model_id);
    expect(fake.counters.evaluation).toBe(1);
    expect(fake.counters.frontier).toBe(0);
    expect(controller.getState().evaluation?.model_id).toBe(target.model_id);
  });

  it("ignores clicks on models missing from the frontier", async () => {
    const { fake, controller } = await makeController();
    await controller.setAttribute("race");
    const onFrontier = new Set(controller.getState().frontier!.points.map((p) => p.model_id));
    const off = ["m000", "m001", "m002", "m003"].find((m) => !onFrontier.has(m));
    if (off) {
      fake.resetCounters();
      await controller.selectModel(off);
      expect(fake.counters.evaluation).toBe(0);
    }
  });
});

describe("failures", () => {
  it("keeps controls interactive and supports retry", async () => {
    const { fake, controller } = await makeController();
    fake.failNext.evaluation = true;
    await controller.setThreshold(0.45);
    expect(controller.getState().error).toMatch(/network down/);
    expect(controller.getState().threshold).toBe(0.45);

    fake.resetCounters();
    await controller.retry();
    expect(fake.counters.evaluation).toBe(1);
    expect(controller.getState().error).toBeNull();
    expect(controller.getState().evaluation?.threshold).toBe(0.45);
  });

  it("surfaces server-side rejection reasons on submit", async () => {
    const { fake, controller } = await makeController();
    fake.failNext.selection = true;
    const ack = await controller.submit(null);
    expect(ack).toBeNull();
    expect(controller.getState().error).toBeTruthy();
    expect(fake.selectionLog).toHaveLength(0);
  });
});

describe("submission", () => {
  it("posts one record and reports its sequence", async () => {
    const { fake, controller } = await makeController();
    const ack = await controller.submit("fair enough");
    expect(ack?.sequence).toBe(1);
    expect(fake.selectionLog).toHaveLength(1);
    const body = JSON.parse(fake.selectionLog[0]);
    expect(body).toEqual({
      session_id: "session-test",
      model_id: "m005",
      threshold: 0.5,
      view: "matrix",
      attribute: null,
      rationale: "fair enough",
    });
  });

  it("guards against rapid double clicks", async () => {
    const { fake, controller } = await makeController();
    const [first, second] = await Promise.all([controller.submit(null), controller.submit(null)]);
    expect(fake.selectionLog).toHaveLength(1);
    expect([first, second].filter((a) => a !== null)).toHaveLength(1);
  });
});
