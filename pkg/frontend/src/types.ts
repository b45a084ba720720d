// Payload shapes of the study service API.

export type Acceptability = "majority" | "fringe";

export interface SessionInfo {
  session_id: string;
  rater_id: string;
  total: number;
}

/** Item view as served in the pre phase: no implication text yet. */
export interface PendingItem {
  headline_id: string;
  headline_text: string;
  phase: "pre_pending" | "revealed";
  position: number;
  total: number;
  /** Present only once the pre rating has been accepted. */
  implication_text?: string;
}

export interface DoneView {
  done: true;
  completed: number;
  total: number;
}

export type NextView = PendingItem | DoneView;

export function isDone(view: NextView): view is DoneView {
  return (view as DoneView).done === true;
}

export interface PostBody {
  trust: number;
  quality: number;
  acceptability: Acceptability;
  perceived_label?: "real" | "misinfo";
}

export type ErrorCode = "PhaseError" | "ValidationError" | "Exhausted";

export class StudyApiError extends Error {
  constructor(
    readonly code: ErrorCode | "Unknown",
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}
