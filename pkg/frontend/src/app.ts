/**
 * Survey view: join form, side-by-side pair display, forced choice with
 * an explanation tag, progress counter and the completion screen (no
 * score is ever shown to participants).
 */

import { EXPLANATION_TAGS, GROUPS, SurveyApi } from "./api.js";
import { Choice, SurveySession } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

export class SurveyApp {
  private session: SurveySession | null = null;
  private selectedSide: "left" | "right" | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SurveyApi,
  ) {}

  renderJoin(): void {
    this.root.replaceChildren();
    const form = el("form", { id: "join-form", class: "card" });
    form.append(el("h1", {}, "Image realism survey"));
    form.append(
      el(
        "p",
        {},
        "You will see 50 pairs of ultrasound images. One image in each pair " +
          "is synthetic. Click the image you believe is synthetic, pick the " +
          "reason that best matches your impression, and submit.",
      ),
    );
    const idInput = el("input", {
      id: "participant-id",
      name: "participant",
      placeholder: "participant id",
      required: "required",
    });
    const groupSelect = el("select", { id: "participant-group" });
    for (const group of GROUPS) {
      groupSelect.append(el("option", { value: group }, group.replace("_", " ")));
    }
    const button = el("button", { type: "submit", id: "join-button" }, "Start");
    form.append(idInput, groupSelect, button);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const pid = idInput.value.trim();
      if (!pid) {
        return;
      }
      void this.startSession(pid, groupSelect.value);
    });
    this.root.append(form);
  }

  async startSession(participantId: string, group: string): Promise<void> {
    this.session = new SurveySession(this.api, participantId, group);
    try {
      const state = await this.session.start();
      if (state.phase === "complete") {
        this.renderComplete();
      } else {
        await this.renderPair(state.pairIndex, state.answered, state.total);
      }
    } catch (error) {
      this.renderError(String(error), () => this.startSession(participantId, group));
    }
  }

  private async renderPair(index: number, answered: number, total: number): Promise<void> {
    const pair = await this.api.pair(index);
    this.selectedSide = null;
    this.root.replaceChildren();

    const header = el("div", { class: "progress" }, `Pair ${answered + 1} of ${total}`);
    const prompt = el("p", { class: "prompt" }, "Click the image you believe is synthetic.");

    const images = el("div", { class: "pair" });
    const leftImg = el("img", {
      id: "image-left",
      src: this.api.imageUrl(pair.left),
      alt: "left image",
      width: "512",
      height: "512",
    });
    const rightImg = el("img", {
      id: "image-right",
      src: this.api.imageUrl(pair.right),
      alt: "right image",
      width: "512",
      height: "512",
    });
    images.append(leftImg, rightImg);

    const tagSelect = el("select", { id: "explanation-tag" });
    for (const tag of EXPLANATION_TAGS) {
      tagSelect.append(el("option", { value: tag.value }, tag.label));
    }
    const textInput = el("input", {
      id: "explanation-text",
      placeholder: "optional details (required for 'Other')",
    });
    const submit = el("button", { id: "submit-choice", disabled: "disabled" }, "Submit");
    const status = el("div", { id: "status", class: "status" });

    const select = (side: "left" | "right") => {
      this.selectedSide = side;
      leftImg.classList.toggle("selected", side === "left");
      rightImg.classList.toggle("selected", side === "right");
      submit.removeAttribute("disabled");
    };
    leftImg.addEventListener("click", () => select("left"));
    rightImg.addEventListener("click", () => select("right"));

    submit.addEventListener("click", () => {
      if (!this.selectedSide) {
        return;
      }
      const choice: Choice = {
        side: this.selectedSide,
        tag: tagSelect.value,
        explanation: textInput.value.trim(),
      };
      void this.submitChoice(choice, status);
    });

    this.root.append(header, prompt, images, el("div", { class: "controls" }), tagSelect, textInput, submit, status);
  }

  private async submitChoice(choice: Choice, status: HTMLElement): Promise<void> {
    if (!this.session) {
      return;
    }
    status.textContent = "";
    try {
      const state = await this.session.submit(choice);
      if (state === null) {
        return; // duplicate click while a submit is in flight
      }
      if (state.phase === "complete") {
        this.renderComplete();
      } else {
        await this.renderPair(state.pairIndex, state.answered, state.total);
      }
    } catch (error) {
      // network failure: keep the pair on screen, offer a retry
      status.textContent = `Submission failed (${String(error)}).`;
      const retry = el("button", { id: "retry-submit" }, "Retry");
      retry.addEventListener("click", () => {
        retry.remove();
        void this.submitChoice(choice, status);
      });
      status.append(el("span", {}, " "), retry);
    }
  }

  renderComplete(): void {
    this.root.replaceChildren();
    const card = el("div", { class: "card", id: "completion" });
    card.append(el("h1", {}, "All done"));
    card.append(
      el(
        "p",
        {},
        "Thank you for taking part. Your responses have been recorded.",
      ),
    );
    this.root.append(card);
  }

  private renderError(message: string, retry: () => Promise<void> | void): void {
    this.root.replaceChildren();
    const card = el("div", { class: "card" });
    card.append(el("h1", {}, "Connection problem"));
    card.append(el("p", { id: "error-message" }, message));
    const button = el("button", { id: "retry-start" }, "Retry");
    button.addEventListener("click", () => void retry());
    card.append(button);
    this.root.append(card);
  }
}
