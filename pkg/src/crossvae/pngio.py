"""Minimal deterministic PNG encode/decode (8-bit gray, RGB, RGBA).

The encoder always emits filter type 0 rows and a fixed zlib level, so
identical arrays produce identical bytes. The decoder handles the five
standard filter types, which covers files from this encoder and from common
external writers, but not palette or sub-byte formats.
"""

import struct
import zlib

import numpy as np

from .errors import ValidationError

_COLOR_TYPE = {1: 0, 3: 2, 4: 6}  # channels -> PNG color type
_CHANNELS = {0: 1, 2: 3, 6: 4}


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def encode_png(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValidationError(f"encode_png: expected uint8 image, got dtype {img.dtype}")
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in _COLOR_TYPE:
        raise ValidationError(f"encode_png: unsupported image shape {tuple(img.shape)}")
    h, w, ch = img.shape
    ihdr = struct.pack(">IIBBBBB", w, h, 8, _COLOR_TYPE[ch], 0, 0, 0)
    raw = bytearray()
    for row in img:
        raw.append(0)  # filter type 0 (None)
        raw += row.tobytes()
    body = zlib.compress(bytes(raw), 6)
    return b"\x89PNG\r\n\x1a\n" + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", body) + _chunk(b"IEND", b"")


def write_png(path, img: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(encode_png(img))


def _unfilter(raw: bytes, h: int, w: int, ch: int) -> np.ndarray:
    stride = w * ch
    out = np.zeros((h, stride), dtype=np.uint8)
    pos = 0
    prev = np.zeros(stride, dtype=np.int32)
    for y in range(h):
        ftype = raw[pos]
        pos += 1
        row = np.frombuffer(raw[pos:pos + stride], dtype=np.uint8).astype(np.int32)
        pos += stride
        cur = np.zeros(stride, dtype=np.int32)
        if ftype == 0:
            cur = row
        elif ftype == 2:
            cur = (row + prev) & 0xFF
        elif ftype in (1, 3, 4):
            for i in range(stride):
                a = cur[i - ch] if i >= ch else 0
                b = prev[i]
                if ftype == 1:
                    pred = a
                elif ftype == 3:
                    pred = (a + b) // 2
                else:
                    c = prev[i - ch] if i >= ch else 0
                    p = a + b - c
                    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                    pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                cur[i] = (row[i] + pred) & 0xFF
        else:
            raise ValidationError(f"decode_png: unsupported filter type {ftype}")
        out[y] = cur.astype(np.uint8)
        prev = cur
    return out.reshape(h, w, ch)


def decode_png(data: bytes) -> np.ndarray:
    if data[:8] != b"\x89PNG\r\n\x1a\n":
        raise ValidationError("decode_png: not a PNG file")
    pos = 8
    ihdr = None
    idat = bytearray()
    while pos + 8 <= len(data):
        length = struct.unpack(">I", data[pos:pos + 4])[0]
        tag = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat += payload
        elif tag == b"IEND":
            break
    if ihdr is None:
        raise ValidationError("decode_png: missing IHDR")
    w, h, depth, color, _, _, interlace = ihdr
    if depth != 8 or color not in _CHANNELS or interlace:
        raise ValidationError(
            f"decode_png: unsupported format (depth {depth}, color type {color}, interlace {interlace})"
        )
    ch = _CHANNELS[color]
    raw = zlib.decompress(bytes(idat))
    img = _unfilter(raw, h, w, ch)
    return img[:, :, 0] if ch == 1 else img


def read_png(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_png(f.read())


def png_to_bitmap(img: np.ndarray, size: int = 32) -> np.ndarray:
    """Decoded PNG array -> float grayscale bitmap in [0, 1], shape checked."""
    img = np.asarray(img)
    if img.ndim == 3:
        img = img[:, :, :3].mean(axis=2)
    if img.shape != (size, size):
        raise ValidationError(f"expected a {size}x{size} image, got {tuple(img.shape)}")
    return img.astype(np.float64) / 255.0
