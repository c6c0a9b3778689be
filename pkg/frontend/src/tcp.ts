/**
 * TCP transport for Node environments (scripted clients and tests).
 * Browsers use the WebSocket transport via the bridge instead.
 */

import * as net from "node:net";

import { Transport } from "./session.js";

export class TcpTransport implements Transport {
  private dataCbs: Array<(chunk: string) => void> = [];
  private closeCbs: Array<() => void> = [];

  private constructor(private socket: net.Socket) {
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      for (const cb of this.dataCbs) cb(chunk);
    });
    socket.on("close", () => {
      for (const cb of this.closeCbs) cb();
    });
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new TcpTransport(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  send(line: string): void {
    this.socket.write(line);
  }

  onData(cb: (chunk: string) => void): void {
    this.dataCbs.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeCbs.push(cb);
  }

  close(): void {
    this.socket.end();
  }
}
