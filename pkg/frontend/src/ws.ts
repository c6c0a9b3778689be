/**
 * WebSocket transport for browsers. The session service speaks raw TCP,
 * so the browser connects through the bundled bridge (see bridge.ts),
 * which forwards text frames to TCP lines one-to-one.
 */

import { Transport } from "./session.js";

export class WebSocketTransport implements Transport {
  private dataCbs: Array<(chunk: string) => void> = [];
  private closeCbs: Array<() => void> = [];

  private constructor(private ws: WebSocket) {
    ws.onmessage = (ev) => {
      for (const cb of this.dataCbs) cb(String(ev.data));
    };
    ws.onclose = () => {
      for (const cb of this.closeCbs) cb();
    };
  }

  static connect(url: string, timeoutMs = 10_000): Promise<WebSocketTransport> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url);
      const timer = setTimeout(() => {
        ws.close();
        reject(new Error(`connect timeout to ${url}`));
      }, timeoutMs);
      ws.onopen = () => {
        clearTimeout(timer);
        resolve(new WebSocketTransport(ws));
      };
      ws.onerror = () => {
        clearTimeout(timer);
        reject(new Error(`websocket error connecting to ${url}`));
      };
    });
  }

  send(line: string): void {
    this.ws.send(line);
  }

  onData(cb: (chunk: string) => void): void {
    this.dataCbs.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }

  close(): void {
    this.ws.close();
  }
}
