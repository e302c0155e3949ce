# SPDX-License-Identifier: Apache-2.0
"""Regenerate src/font8x16.cpp from DejaVu Sans Mono Bold.

Each ASCII glyph (32..126) is rasterized into an 8x16 cell and thresholded
to 1-bit. Run from the repository root:

    python3 tools/gen_font.py [--preview "Ag1?"]
"""
import argparse
import sys

from PIL import Image, ImageDraw, ImageFont

FONT_PATH = "/usr/share/fonts/truetype/dejavu/DejaVuSansMono-Bold.ttf"
CELL_W, CELL_H = 8, 16
CHARS = [chr(c) for c in range(32, 127)]


def render_glyph(font, ch, y_off):
    img = Image.new("L", (CELL_W, CELL_H), 0)
    draw = ImageDraw.Draw(img)
    draw.text((0, y_off), ch, fill=255, font=font)
    rows = []
    for y in range(CELL_H):
        byte = 0
        for x in range(CELL_W):
            if img.getpixel((x, y)) >= 112:
                byte |= 0x80 >> x
        rows.append(byte)
    return rows


def build_table():
    font = ImageFont.truetype(FONT_PATH, 13)
    ascent, descent = font.getmetrics()
    y_off = CELL_H - (ascent + descent)
    return [render_glyph(font, ch, y_off) for ch in CHARS]


def preview(table, text):
    for ch in text:
        rows = table[ord(ch) - 32]
        print(f"--- {ch!r}")
        for b in rows:
            print("".join("#" if b & (0x80 >> x) else "." for x in range(CELL_W)))


def emit(table, path):
    lines = [
        "// SPDX-License-Identifier: Apache-2.0",
        "// Generated by tools/gen_font.py. Do not edit by hand.",
        "// 1-bit 8x16 glyphs for ASCII 32..126, thresholded from DejaVu Sans",
        "// Mono Bold (Bitstream Vera license). MSB is the leftmost pixel.",
        '#include "occ/font8x16.hpp"',
        "",
        "namespace occ {",
        "",
        "const uint8_t kFont8x16[95][16] = {",
    ]
    for i, rows in enumerate(table):
        body = ", ".join(f"0x{b:02x}" for b in rows)
        ch = CHARS[i].replace("\\", "\\\\")
        lines.append(f"    {{{body}}},  // '{ch}'")
    lines += ["};", "", "}  // namespace occ", ""]
    with open(path, "w") as f:
        f.write("\n".join(lines))
    print(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preview", default="")
    ap.add_argument("--out", default="src/font8x16.cpp")
    args = ap.parse_args()
    table = build_table()
    empties = [CHARS[i] for i, rows in enumerate(table) if not any(rows) and CHARS[i] != " "]
    if empties:
        print(f"warning: blank glyphs: {empties}", file=sys.stderr)
    if args.preview:
        preview(table, args.preview)
    else:
        emit(table, args.out)


if __name__ == "__main__":
    main()
