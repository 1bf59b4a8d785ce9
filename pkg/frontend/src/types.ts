/** Wire types mirroring the session service JSON snapshots. */

export interface ProposedQuery {
  id: number;
  name: string;
  domain: string;
}

export interface Step {
  query_id: number;
  query: string;
  answer: number;
}

export interface SessionSnapshot {
  session_id: string;
  checkpoint: string;
  status: "AwaitingAnswer" | "Stopped";
  posterior: number[];
  posterior_history: number[][];
  labels: string[];
  steps: Step[];
  proposed_query?: ProposedQuery;
  prediction?: string;
  stop_reason?: string;
}

export interface CheckpointInfo {
  name: string;
  num_queries: number;
  queries: string[];
  labels: string[];
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
