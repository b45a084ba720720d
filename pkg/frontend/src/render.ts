import { SessionController, ViewState, canSubmitPre, canSubmitPost } from "./state.js";
import { Acceptability } from "./types.js";

const TRUST_LOW = "clearly misinformation";
const TRUST_HIGH = "clearly real news";
const QUALITY_LOW = "incoherent or copied";
const QUALITY_HIGH = "coherent and relevant";

function scale(
  name: string,
  legend: string,
  lowLabel: string,
  highLabel: string,
  selected: number | undefined,
  onSelect: (value: number) => void,
): HTMLFieldSetElement {
  const fieldset = document.createElement("fieldset");
  fieldset.className = "likert";
  const caption = document.createElement("legend");
  caption.textContent = legend;
  fieldset.appendChild(caption);

  const row = document.createElement("div");
  row.className = "likert-row";
  const low = document.createElement("span");
  low.className = "likert-end";
  low.textContent = `1 = ${lowLabel}`;
  row.appendChild(low);
  for (let value = 1; value <= 5; value += 1) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = name;
    input.value = String(value);
    input.checked = selected === value;
    input.addEventListener("change", () => onSelect(value));
    label.appendChild(input);
    label.appendChild(document.createTextNode(String(value)));
    row.appendChild(label);
  }
  const high = document.createElement("span");
  high.className = "likert-end";
  high.textContent = `5 = ${highLabel}`;
  row.appendChild(high);
  fieldset.appendChild(row);
  return fieldset;
}

function acceptabilityToggle(
  selected: Acceptability | undefined,
  onSelect: (value: Acceptability) => void,
): HTMLFieldSetElement {
  const fieldset = document.createElement("fieldset");
  fieldset.className = "likert";
  const caption = document.createElement("legend");
  caption.textContent = "The viewpoint this implication invokes is";
  fieldset.appendChild(caption);
  const row = document.createElement("div");
  row.className = "likert-row";
  const options: [Acceptability, string][] = [
    ["majority", "a majority (mainstream) viewpoint"],
    ["fringe", "a minority (fringe) viewpoint"],
  ];
  for (const [value, text] of options) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = "acceptability";
    input.value = value;
    input.checked = selected === value;
    input.addEventListener("change", () => onSelect(value));
    label.appendChild(input);
    label.appendChild(document.createTextNode(text));
    row.appendChild(label);
  }
  fieldset.appendChild(row);
  return fieldset;
}

function submitButton(text: string, enabled: boolean, onClick: () => void): HTMLButtonElement {
  const button = document.createElement("button");
  button.type = "button";
  button.textContent = text;
  button.disabled = !enabled;
  button.addEventListener("click", onClick);
  return button;
}

/** Render the whole view for the current state into `root`. */
export function render(root: HTMLElement, state: ViewState, controller: SessionController): void {
  root.replaceChildren();

  const progress = document.createElement("p");
  progress.className = "progress";
  progress.textContent =
    state.phase === "done"
      ? `session complete: ${state.completed} of ${state.total} items`
      : state.total > 0
        ? `item ${state.position} of ${state.total}`
        : "";
  root.appendChild(progress);

  if (state.error) {
    const error = document.createElement("p");
    error.className = "error";
    error.setAttribute("role", "alert");
    error.textContent = state.error;
    root.appendChild(error);
  }

  if (state.phase === "done") {
    const thanks = document.createElement("p");
    thanks.textContent = "All items rated. Thank you!";
    root.appendChild(thanks);
    return;
  }

  const headline = document.createElement("h2");
  headline.className = "headline";
  headline.textContent = state.headlineText ?? "";
  root.appendChild(headline);

  if (state.phase === "pre") {
    const prompt = document.createElement("p");
    prompt.textContent = "How trustworthy does this headline look?";
    root.appendChild(prompt);
    root.appendChild(
      scale("pre-trust", "Trustworthiness", TRUST_LOW, TRUST_HIGH, state.preTrust, (v) => {
        controller.selectPreTrust(v);
      }),
    );
    root.appendChild(
      submitButton("Submit rating", canSubmitPre(state), () => {
        void controller.submitPre();
      }),
    );
    return;
  }

  // revealed: show the templated implication plus the three judgements
  const implication = document.createElement("blockquote");
  implication.className = "implication";
  implication.textContent = state.implication ?? "";
  root.appendChild(implication);

  root.appendChild(
    scale("post-trust", "Trustworthiness, seeing the implication", TRUST_LOW, TRUST_HIGH, state.postTrust, (v) => {
      controller.selectPostTrust(v);
    }),
  );
  root.appendChild(
    scale("quality", "Quality of the implication", QUALITY_LOW, QUALITY_HIGH, state.quality, (v) => {
      controller.selectQuality(v);
    }),
  );
  root.appendChild(
    acceptabilityToggle(state.acceptability, (v) => {
      controller.selectAcceptability(v);
    }),
  );
  root.appendChild(
    submitButton("Submit judgement", canSubmitPost(state), () => {
      void controller.submitPost();
    }),
  );
}
