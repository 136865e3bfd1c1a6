/**
 * Participant session state: resuming, advancing and duplicate-submit
 * protection. Kept free of DOM concerns so it is unit-testable.
 */

import { Progress, ResponseBody, SubmitOutcome, SurveyApi } from "./api.js";

export interface Choice {
  side: "left" | "right";
  tag: string;
  explanation: string;
}

export type SessionState =
  | { phase: "answering"; pairIndex: number; answered: number; total: number }
  | { phase: "complete"; total: number };

export class SurveySession {
  private inFlight = false;
  private progress: Progress | null = null;

  constructor(
    private readonly api: SurveyApi,
    readonly participantId: string,
    readonly group: string,
  ) {}

  /** Resume at the first unanswered pair (fresh sessions start at 0). */
  async start(): Promise<SessionState> {
    this.progress = await this.api.progress(this.participantId);
    return this.state();
  }

  state(): SessionState {
    const progress = this.progress;
    if (progress === null) {
      throw new Error("session not started");
    }
    if (progress.next_unanswered === null) {
      return { phase: "complete", total: progress.total };
    }
    return {
      phase: "answering",
      pairIndex: progress.next_unanswered,
      answered: progress.answered.length,
      total: progress.total,
    };
  }

  /**
   * Submit the choice for the current pair and advance.
   *
   * A second call while one is in flight is ignored (double-click
   * guard). A conflict (already answered, e.g. in another tab) is
   * resolved by re-syncing progress and moving on.
   */
  async submit(choice: Choice): Promise<SessionState | null> {
    if (this.inFlight) {
      return null;
    }
    const state = this.state();
    if (state.phase !== "answering") {
      return state;
    }
    const body: ResponseBody = {
      participant_id: this.participantId,
      group: this.group,
      pair_index: state.pairIndex,
      selection: choice.side,
      tag: choice.tag,
      explanation: choice.explanation,
    };
    this.inFlight = true;
    try {
      const outcome: SubmitOutcome = await this.api.submit(body);
      if (outcome.kind === "rejected") {
        throw new Error(outcome.detail);
      }
      // stored or conflict: either way the server now has an answer
      this.progress = await this.api.progress(this.participantId);
      return this.state();
    } finally {
      this.inFlight = false;
    }
  }
}
