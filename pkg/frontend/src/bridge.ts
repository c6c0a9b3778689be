/**
 * WebSocket-to-TCP bridge so the browser client can reach the session
 * service. Each WebSocket connection gets its own TCP connection; text
 * frames and TCP bytes pass through unchanged in both directions.
 *
 * The WebSocket side is a minimal self-contained RFC 6455 server
 * (handshake, masked client frames, text/close/ping opcodes) so the
 * bridge runs on a bare Node install with no packages.
 *
 * Usage: node dist/bridge.js [--listen 8080] [--target-host 127.0.0.1]
 *        [--target-port 7021]
 */

import * as crypto from "node:crypto";
import * as http from "node:http";
import * as net from "node:net";
import type * as stream from "node:stream";

const WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

export interface BridgeOptions {
  listenPort: number;
  targetHost: string;
  targetPort: number;
}

/** Encode one unmasked server-to-client frame. */
function encodeFrame(opcode: number, payload: Buffer): Buffer {
  const len = payload.length;
  let header: Buffer;
  if (len < 126) {
    header = Buffer.from([0x80 | opcode, len]);
  } else if (len < 65536) {
    header = Buffer.alloc(4);
    header[0] = 0x80 | opcode;
    header[1] = 126;
    header.writeUInt16BE(len, 2);
  } else {
    header = Buffer.alloc(10);
    header[0] = 0x80 | opcode;
    header[1] = 127;
    header.writeBigUInt64BE(BigInt(len), 2);
  }
  return Buffer.concat([header, payload]);
}

export function encodeTextFrame(text: string): Buffer {
  return encodeFrame(0x1, Buffer.from(text, "utf-8"));
}

export interface DecodedFrame {
  opcode: number;
  fin: boolean;
  payload: Buffer;
  frameLength: number;
}

/** Decode one client frame from the head of `buf`, or null if incomplete. */
export function decodeFrame(buf: Buffer): DecodedFrame | null {
  if (buf.length < 2) return null;
  const fin = (buf[0] & 0x80) !== 0;
  const opcode = buf[0] & 0x0f;
  const masked = (buf[1] & 0x80) !== 0;
  let len = buf[1] & 0x7f;
  let offset = 2;
  if (len === 126) {
    if (buf.length < 4) return null;
    len = buf.readUInt16BE(2);
    offset = 4;
  } else if (len === 127) {
    if (buf.length < 10) return null;
    len = Number(buf.readBigUInt64BE(2));
    offset = 10;
  }
  const maskLen = masked ? 4 : 0;
  if (buf.length < offset + maskLen + len) return null;
  let payload = buf.subarray(offset + maskLen, offset + maskLen + len);
  if (masked) {
    const mask = buf.subarray(offset, offset + 4);
    const unmasked = Buffer.allocUnsafe(len);
    for (let i = 0; i < len; i++) unmasked[i] = payload[i] ^ mask[i % 4];
    payload = unmasked;
  }
  return { opcode, fin, payload, frameLength: offset + maskLen + len };
}

function acceptKey(key: string): string {
  return crypto.createHash("sha1").update(key + WS_GUID).digest("base64");
}

/** Pipe one upgraded WebSocket connection to a fresh TCP connection. */
function bridgeConnection(ws: stream.Duplex, head: Buffer, opts: BridgeOptions): void {
  const tcp = net.createConnection({ host: opts.targetHost, port: opts.targetPort });
  tcp.on("data", (chunk: Buffer) => ws.write(encodeFrame(0x1, chunk)));
  tcp.on("close", () => ws.end(encodeFrame(0x8, Buffer.alloc(0))));
  tcp.on("error", () => ws.destroy());

  let pending = Buffer.alloc(0);
  let message = Buffer.alloc(0); // accumulates across continuation frames
  const onData = (chunk: Buffer) => {
    pending = Buffer.concat([pending, chunk]);
    for (;;) {
      const frame = decodeFrame(pending);
      if (frame === null) return;
      pending = pending.subarray(frame.frameLength);
      if (frame.opcode === 0x8) {
        ws.end(encodeFrame(0x8, Buffer.alloc(0)));
        tcp.end();
        return;
      }
      if (frame.opcode === 0x9) {
        ws.write(encodeFrame(0xa, frame.payload));
        continue;
      }
      if (frame.opcode === 0x1 || frame.opcode === 0x0) {
        message = Buffer.concat([message, frame.payload]);
        if (frame.fin) {
          tcp.write(message);
          message = Buffer.alloc(0);
        }
      }
    }
  };
  ws.on("data", onData);
  if (head.length > 0) onData(head); // frames that arrived with the upgrade request
  ws.on("close", () => tcp.end());
  ws.on("error", () => tcp.destroy());
}

export function startBridge(opts: BridgeOptions): http.Server {
  const server = http.createServer((_req, res) => {
    res.writeHead(426, { "Content-Type": "text/plain" });
    res.end("WebSocket upgrade required\n");
  });
  server.on("upgrade", (req, socket, head) => {
    const key = req.headers["sec-websocket-key"];
    if (req.headers.upgrade?.toLowerCase() !== "websocket" || typeof key !== "string") {
      socket.end("HTTP/1.1 400 Bad Request\r\n\r\n");
      return;
    }
    socket.write(
      "HTTP/1.1 101 Switching Protocols\r\n" +
        "Upgrade: websocket\r\n" +
        "Connection: Upgrade\r\n" +
        `Sec-WebSocket-Accept: ${acceptKey(key)}\r\n\r\n`,
    );
    bridgeConnection(socket, head, opts);
  });
  server.listen(opts.listenPort);
  return server;
}

function parseArgs(argv: string[]): BridgeOptions {
  const opts: BridgeOptions = { listenPort: 8080, targetHost: "127.0.0.1", targetPort: 7021 };
  for (let i = 0; i < argv.length; i += 2) {
    const value = argv[i + 1];
    if (argv[i] === "--listen") opts.listenPort = Number(value);
    else if (argv[i] === "--target-host") opts.targetHost = value;
    else if (argv[i] === "--target-port") opts.targetPort = Number(value);
    else throw new Error(`unknown argument ${argv[i]}`);
  }
  return opts;
}

const isMain = process.argv[1]?.endsWith("bridge.js") ?? false;
if (isMain) {
  const opts = parseArgs(process.argv.slice(2));
  startBridge(opts);
  console.error(
    `bridge: ws://127.0.0.1:${opts.listenPort} -> tcp://${opts.targetHost}:${opts.targetPort}`,
  );
}
