#!/usr/bin/env python3
# Copyright 2026 The Probe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Regenerates include/probe/detail/unicode_tables.hpp from unicodedata."""
import pathlib
import unicodedata

ROOT = pathlib.Path(__file__).resolve().parent.parent
LICENSE = """// Copyright 2026 The Probe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

"""


def decomposition_pairs():
    for cp in list(range(0xC0, 0x500)) + list(range(0x1E00, 0x2000)):
        c = chr(cp)
        d = unicodedata.normalize("NFD", c)
        if d == c:
            continue
        if unicodedata.category(d[0]) != "Mn" and all(
            unicodedata.category(x) == "Mn" for x in d[1:]
        ):
            yield cp, ord(d[0])


def lowercase_pairs():
    for cp in range(0xC0, 0x530):
        low = chr(cp).lower()
        if len(low) == 1 and ord(low) != cp:
            yield cp, ord(low)


def emit(pairs):
    cells = [f"{{0x{a:04X}, 0x{b:04X}}}" for a, b in pairs]
    return "\n".join(
        "    " + ", ".join(cells[i : i + 6]) + "," for i in range(0, len(cells), 6)
    )


def main():
    dec = list(decomposition_pairs())
    low = list(lowercase_pairs())
    text = LICENSE + f"""#pragma once

// Generated from the Unicode Character Database {unicodedata.unidata_version}.
// Do not edit by hand; regenerate with scripts/gen_unicode_tables.py.

#include <array>
#include <utility>

namespace probe::detail {{

using CodepointPair = std::pair<char32_t, char32_t>;

/// Precomposed letter -> base letter of its canonical decomposition, for
/// letters whose decomposition is one base followed only by combining marks.
/// Sorted by key. Covers U+00C0..U+04FF and U+1E00..U+1FFF.
inline constexpr std::array<CodepointPair, {len(dec)}> kDecompositionBase{{{{
{emit(dec)}
}}}};

/// Simple (single codepoint) lowercase mapping for U+00C0..U+052F. Sorted by key.
inline constexpr std::array<CodepointPair, {len(low)}> kLowercase{{{{
{emit(low)}
}}}};

}}  // namespace probe::detail
"""
    (ROOT / "include/probe/detail/unicode_tables.hpp").write_text(text)


if __name__ == "__main__":
    main()
