/**
 * Session socket: one WebSocket per signing session.  A drop reconnects
 * with a fresh session (stroke state lives on the server, so a reconnect
 * intentionally starts blank).
 */

import { ClientMessage, ServerMessage, parseServerMessage } from './protocol.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export interface SessionSocketOptions {
  reconnectDelayMs?: number;
  onMessage: (msg: ServerMessage) => void;
  onStateChange?: (connected: boolean) => void;
  /** Injectable for tests; defaults to the browser WebSocket. */
  factory?: SocketFactory;
  /** Injectable timer for tests. */
  schedule?: (fn: () => void, ms: number) => void;
}

export class SessionSocket {
  private socket: SocketLike | null = null;
  private closed = false;
  private readonly factory: SocketFactory;
  private readonly schedule: (fn: () => void, ms: number) => void;

  constructor(
    private readonly url: string,
    private readonly opts: SessionSocketOptions,
  ) {
    this.factory =
      opts.factory ??
      ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => this.opts.onStateChange?.(true);
    sock.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      if (msg) {
        this.opts.onMessage(msg);
      } else {
        console.warn('airsign: ignoring malformed message', ev.data);
      }
    };
    sock.onclose = () => {
      this.opts.onStateChange?.(false);
      this.socket = null;
      if (!this.closed) {
        this.schedule(() => this.open(), this.opts.reconnectDelayMs ?? 1000);
      }
    };
  }

  get isOpen(): boolean {
    return this.socket !== null && this.socket.readyState === OPEN;
  }

  send(msg: ClientMessage): boolean {
    if (!this.isOpen || !this.socket) return false;
    this.socket.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }
}
