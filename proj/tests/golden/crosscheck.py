"""Recompute every sealed sample in wire_samples.json with an independent
AES-GCM implementation (pyca/cryptography) and compare byte for byte."""

import json
import struct
import sys

from cryptography.hazmat.primitives.ciphers.aead import AESGCM


def header_bytes(pkt):
    counter = pkt["counter"].to_bytes(6, "big")
    return struct.pack(">BIHIB", 1, pkt["epoch"], pkt["origin"], pkt["seq"], pkt["hop_limit"]) + counter


def check_packet(pkt, broadcast_key, session_key):
    name = pkt["name"]
    frame = bytes.fromhex(pkt["frame_hex"])
    nonce = bytes.fromhex(pkt["nonce_hex"])
    aad = bytes.fromhex(pkt["aad_hex"])
    wire = bytes.fromhex(pkt["wire_hex"])
    header = header_bytes(pkt)
    ok = True
    ok &= nonce == header[1:7] + header[12:18]
    ok &= aad == header[:11] + header[12:18]
    if name.startswith("cleartext"):
        expected = header + frame + bytes(16)
    else:
        key = session_key if pkt["epoch"] == 0 else broadcast_key
        expected = header + AESGCM(key).encrypt(nonce, frame, aad)
    ok &= expected == wire
    print(("ok " if ok else "MISMATCH ") + name)
    return ok


def main():
    with open(sys.argv[1]) as f:
        data = json.load(f)
    bkey = bytes.fromhex(data["broadcast_key_hex"])
    skey = bytes.fromhex(data["session_key_hex"])
    results = [check_packet(p, bkey, skey) for p in data["packets"]]
    sys.exit(0 if results and all(results) else 1)


if __name__ == "__main__":
    main()
