import * as crypto from "node:crypto";
import * as net from "node:net";
import { afterAll, describe, expect, it } from "vitest";

import { decodeFrame, encodeTextFrame, startBridge } from "../src/bridge.js";

function maskFrame(text: string): Buffer {
  const payload = Buffer.from(text, "utf-8");
  const mask = crypto.randomBytes(4);
  const masked = Buffer.from(payload.map((b, i) => b ^ mask[i % 4]));
  let header: Buffer;
  if (payload.length < 126) {
    header = Buffer.from([0x81, 0x80 | payload.length]);
  } else {
    header = Buffer.alloc(4);
    header[0] = 0x81;
    header[1] = 0x80 | 126;
    header.writeUInt16BE(payload.length, 2);
  }
  return Buffer.concat([header, mask, masked]);
}

describe("frame codec", () => {
  it("round-trips short text frames", () => {
    const frame = encodeTextFrame("hello\n");
    const decoded = decodeFrame(frame)!;
    expect(decoded.opcode).toBe(0x1);
    expect(decoded.fin).toBe(true);
    expect(decoded.payload.toString()).toBe("hello\n");
    expect(decoded.frameLength).toBe(frame.length);
  });

  it("round-trips extended-length frames", () => {
    const text = "x".repeat(70_000);
    const decoded = decodeFrame(encodeTextFrame(text))!;
    expect(decoded.payload.toString()).toBe(text);
  });

  it("unmasks client frames", () => {
    const decoded = decodeFrame(maskFrame("masked payload"))!;
    expect(decoded.payload.toString()).toBe("masked payload");
  });

  it("returns null on incomplete input", () => {
    const frame = encodeTextFrame("hello");
    for (let cut = 0; cut < frame.length; cut++) {
      expect(decodeFrame(frame.subarray(0, cut))).toBeNull();
    }
  });
});

describe("bridge pass-through", () => {
  const TCP_PORT = 19000 + Math.floor(Math.random() * 5000);
  const WS_PORT = TCP_PORT + 1;
  let backend: net.Server;
  let bridge: ReturnType<typeof startBridge>;

  afterAll(() => {
    bridge?.close();
    backend?.close();
  });

  it("relays text frames to TCP and TCP bytes back as frames", async () => {
    backend = net.createServer((sock) => {
      sock.write("banner\n");
      sock.on("data", (chunk) => sock.write(`echo:${chunk}`));
    });
    await new Promise<void>((r) => backend.listen(TCP_PORT, r));
    bridge = startBridge({ listenPort: WS_PORT, targetHost: "127.0.0.1", targetPort: TCP_PORT });
    await new Promise<void>((r) => bridge.once("listening", r));

    const texts = await new Promise<string[]>((resolve, reject) => {
      const sock = net.createConnection(WS_PORT);
      const key = crypto.randomBytes(16).toString("base64");
      const received: string[] = [];
      let buf = Buffer.alloc(0);
      let upgraded = false;
      const timer = setTimeout(() => reject(new Error("timed out")), 10_000);
      sock.on("connect", () => {
        sock.write(
          "GET / HTTP/1.1\r\nHost: test\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n" +
            `Sec-WebSocket-Key: ${key}\r\nSec-WebSocket-Version: 13\r\n\r\n`,
        );
      });
      sock.on("data", (chunk) => {
        buf = Buffer.concat([buf, chunk]);
        if (!upgraded) {
          const end = buf.indexOf("\r\n\r\n");
          if (end < 0) return;
          const head = buf.subarray(0, end).toString();
          expect(head).toContain("101 Switching Protocols");
          const expected = crypto
            .createHash("sha1")
            .update(key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11")
            .digest("base64");
          expect(head).toContain(expected);
          buf = buf.subarray(end + 4);
          upgraded = true;
          sock.write(maskFrame("ping over ws\n"));
        }
        for (;;) {
          const frame = decodeFrame(buf);
          if (frame === null) break;
          buf = buf.subarray(frame.frameLength);
          if (frame.opcode === 0x1) received.push(frame.payload.toString());
          if (received.join("").includes("echo:ping over ws\n")) {
            clearTimeout(timer);
            sock.destroy();
            resolve(received);
            return;
          }
        }
      });
      sock.on("error", reject);
    });

    expect(texts.join("")).toBe("banner\necho:ping over ws\n");
  });
});
