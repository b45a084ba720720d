import { StudyApi } from "./api.js";
import {
  Acceptability,
  NextView,
  PendingItem,
  StudyApiError,
  isDone,
} from "./types.js";

export type Phase = "pre" | "revealed" | "done";

/**
 * Client view state. While phase is "pre" the implication is absent: the
 * server omits it from pending views and the controller only stores it
 * from the pre-rating acknowledgment, so hidden text can never leak into
 * the DOM (or even into client memory) early.
 */
export interface ViewState {
  phase: Phase;
  sessionId?: string;
  headlineId?: string;
  headlineText?: string;
  implication?: string;
  preTrust?: number;
  postTrust?: number;
  quality?: number;
  acceptability?: Acceptability;
  position: number;
  total: number;
  completed: number;
  busy: boolean;
  error?: string;
}

const INITIAL: ViewState = {
  phase: "pre",
  position: 0,
  total: 0,
  completed: 0,
  busy: false,
};

/** The hidden-implication rating can go out once a value is picked. */
export function canSubmitPre(state: ViewState): boolean {
  return state.phase === "pre" && !state.busy && state.preTrust !== undefined;
}

/** The full judgement needs trust, quality and acceptability. */
export function canSubmitPost(state: ViewState): boolean {
  return (
    state.phase === "revealed" &&
    !state.busy &&
    state.postTrust !== undefined &&
    state.quality !== undefined &&
    state.acceptability !== undefined
  );
}

export type Listener = (state: ViewState) => void;

export class SessionController {
  private state: ViewState = { ...INITIAL };

  constructor(
    private readonly api: StudyApi,
    private readonly listener: Listener = () => {},
  ) {}

  snapshot(): ViewState {
    return { ...this.state };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.listener(this.snapshot());
  }

  /** Create a fresh session for the rater and load its first item. */
  async start(raterId: string, queueSize?: number, seed?: number): Promise<string> {
    this.update({ ...INITIAL, busy: true });
    try {
      const session = await this.api.createSession(raterId, queueSize, seed);
      this.update({ sessionId: session.session_id, total: session.total });
      await this.loadNext();
      return session.session_id;
    } catch (error) {
      this.fail(error);
      throw error;
    }
  }

  /** Re-attach to an existing session (session id carried in the URL). */
  async resume(sessionId: string): Promise<void> {
    this.update({ ...INITIAL, sessionId, busy: true });
    try {
      await this.loadNext();
    } catch (error) {
      this.fail(error);
      throw error;
    }
  }

  private async loadNext(): Promise<void> {
    const view = await this.api.next(this.requireSession());
    this.applyNextView(view);
  }

  private applyNextView(view: NextView): void {
    if (isDone(view)) {
      this.update({
        phase: "done",
        busy: false,
        headlineId: undefined,
        headlineText: undefined,
        implication: undefined,
        completed: view.completed,
        total: view.total,
        error: undefined,
      });
      return;
    }
    const revealed = view.phase === "revealed" && view.implication_text !== undefined;
    this.update({
      phase: revealed ? "revealed" : "pre",
      busy: false,
      headlineId: view.headline_id,
      headlineText: view.headline_text,
      implication: revealed ? view.implication_text : undefined,
      preTrust: undefined,
      postTrust: undefined,
      quality: undefined,
      acceptability: undefined,
      position: view.position,
      total: view.total,
      completed: view.position - 1,
      error: undefined,
    });
  }

  // -- pre phase --

  selectPreTrust(value: number): void {
    if (this.state.phase !== "pre") return;
    this.update({ preTrust: value });
  }

  canSubmitPre(): boolean {
    return canSubmitPre(this.state);
  }

  /**
   * Send the hidden-implication rating. The phase flips to "revealed"
   * only once the server acknowledges and returns the implication.
   */
  async submitPre(): Promise<void> {
    if (!this.canSubmitPre()) return;
    this.update({ busy: true, error: undefined });
    try {
      const revealed = await this.api.submitPre(
        this.requireSession(),
        this.requireHeadline(),
        this.state.preTrust as number,
      );
      this.update({
        phase: "revealed",
        busy: false,
        implication: revealed.implication_text,
      });
    } catch (error) {
      this.fail(error);
    }
  }

  // -- revealed phase --

  selectPostTrust(value: number): void {
    if (this.state.phase !== "revealed") return;
    this.update({ postTrust: value });
  }

  selectQuality(value: number): void {
    if (this.state.phase !== "revealed") return;
    this.update({ quality: value });
  }

  selectAcceptability(value: Acceptability): void {
    if (this.state.phase !== "revealed") return;
    this.update({ acceptability: value });
  }

  canSubmitPost(): boolean {
    return canSubmitPost(this.state);
  }

  /** Send the full judgement; the server's reply is the next queue view. */
  async submitPost(): Promise<void> {
    if (!this.canSubmitPost()) return;
    this.update({ busy: true, error: undefined });
    try {
      const view = await this.api.submitPost(
        this.requireSession(),
        this.requireHeadline(),
        {
          trust: this.state.postTrust as number,
          quality: this.state.quality as number,
          acceptability: this.state.acceptability as Acceptability,
        },
      );
      this.applyNextView(view);
    } catch (error) {
      this.fail(error);
    }
  }

  // -- helpers --

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error("no active session");
    return this.state.sessionId;
  }

  private requireHeadline(): string {
    if (!this.state.headlineId) throw new Error("no active item");
    return this.state.headlineId;
  }

  private fail(error: unknown): void {
    const message =
      error instanceof StudyApiError
        ? `${error.code}: ${error.message}`
        : error instanceof Error
          ? error.message
          : String(error);
    this.update({ busy: false, error: message });
  }
}
