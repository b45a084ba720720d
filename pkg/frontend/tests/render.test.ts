// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { render } from "../src/render.js";
import { SessionController, ViewState } from "../src/state.js";
import type { StudyApi } from "../src/api.js";

const IMPLICATION = "The writer is implying that masks help";

function baseState(overrides: Partial<ViewState>): ViewState {
  return {
    phase: "pre",
    sessionId: "s1",
    headlineId: "h1",
    headlineText: "masks work well",
    position: 1,
    total: 4,
    completed: 0,
    busy: false,
    ...overrides,
  };
}

function mount(state: ViewState): HTMLElement {
  const controller = new SessionController({} as StudyApi);
  const root = document.createElement("div");
  render(root, state, controller);
  return root;
}

function submitOf(root: HTMLElement): HTMLButtonElement {
  const button = root.querySelector("button");
  if (!button) throw new Error("no submit button rendered");
  return button;
}

describe("pre view", () => {
  it("disables submit until a trust value is selected", () => {
    expect(submitOf(mount(baseState({}))).disabled).toBe(true);
    expect(submitOf(mount(baseState({ preTrust: 3 }))).disabled).toBe(false);
  });

  it("labels the scale endpoints", () => {
    const html = mount(baseState({})).innerHTML;
    expect(html).toContain("clearly misinformation");
    expect(html).toContain("clearly real news");
  });

  it("never contains implication text", () => {
    const root = mount(baseState({ preTrust: 2 }));
    expect(root.innerHTML).not.toContain("implying");
  });

  it("shows the progress counter", () => {
    expect(mount(baseState({})).textContent).toContain("item 1 of 4");
  });
});

describe("post view", () => {
  const revealed = baseState({ phase: "revealed", implication: IMPLICATION });

  it("shows the templated implication", () => {
    expect(mount(revealed).textContent).toContain(IMPLICATION);
  });

  it("blocks submit while any field is missing", () => {
    expect(submitOf(mount(revealed)).disabled).toBe(true);
    expect(
      submitOf(mount({ ...revealed, postTrust: 2, quality: 4 })).disabled,
    ).toBe(true);
    expect(
      submitOf(
        mount({ ...revealed, postTrust: 2, quality: 4, acceptability: "majority" }),
      ).disabled,
    ).toBe(false);
  });

  it("renders quality scale and acceptability toggle", () => {
    const html = mount(revealed).innerHTML;
    expect(html).toContain("Quality of the implication");
    expect(html).toContain("majority");
    expect(html).toContain("fringe");
  });
});

describe("done view", () => {
  it("reports the completed count and no controls", () => {
    const root = mount(baseState({ phase: "done", completed: 4 }));
    expect(root.textContent).toContain("session complete: 4 of 4");
    expect(root.querySelector("button")).toBeNull();
  });
});

describe("error banner", () => {
  it("is announced via role=alert", () => {
    const root = mount(baseState({ error: "PhaseError: out of order" }));
    const alert = root.querySelector('[role="alert"]');
    expect(alert?.textContent).toContain("PhaseError");
  });
});
