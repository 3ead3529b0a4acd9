// Connection-independent session state: the latest-snapshot mailbox,
// the deduplicated event feed, and persistent stop markers. Rendering
// reads from here; the websocket layer writes into it.

import {
  EventMessage,
  SequenceTracker,
  ServerMessage,
  Snapshot,
} from "./protocol";

export interface FeedEntry {
  seq: number;
  t: number;
  event: string;
  text: string;
}

const FEED_LIMIT = 50;

export class SessionState {
  snapshot: Snapshot | null = null;
  feed: FeedEntry[] = [];
  stopPositions: [number, number][] = [];
  connected = false;
  lastError: string | null = null;

  private seqTracker = new SequenceTracker();
  private seenEvents = new Set<number>();

  // Returns true when the message changed visible state.
  ingest(msg: ServerMessage): boolean {
    if (!this.seqTracker.accept(msg.seq)) return false;
    if (msg.type === "snapshot") {
      this.snapshot = msg; // mailbox: latest snapshot wins
      return true;
    }
    if (msg.type === "event") {
      if (this.seenEvents.has(msg.seq)) return false;
      this.seenEvents.add(msg.seq);
      this.addFeedEntry(msg);
      return true;
    }
    this.lastError = msg.notice;
    return true;
  }

  private addFeedEntry(msg: EventMessage): void {
    const pos = Array.isArray(msg.position)
      ? (msg.position as number[])
      : null;
    if (msg.event === "stop" && pos) {
      this.stopPositions.push([pos[0], pos[1]]);
    }
    const where = pos
      ? ` at (${pos[0].toFixed(1)}, ${pos[1].toFixed(1)})`
      : "";
    this.feed.push({
      seq: msg.seq,
      t: msg.t,
      event: msg.event,
      text: `[${msg.t.toFixed(2)}s] ${msg.event}${where}`,
    });
    if (this.feed.length > FEED_LIMIT) {
      this.feed.splice(0, this.feed.length - FEED_LIMIT);
    }
  }

  onDisconnect(): void {
    this.connected = false;
  }

  onConnect(): void {
    // a new connection restarts the server-side sequence counter
    this.connected = true;
    this.seqTracker.reset();
    this.seenEvents.clear();
  }

  onReset(): void {
    this.stopPositions = [];
    this.feed = [];
  }
}
