####################################################################################
# Copyright (c) 2026 MixDesk                                                       #
# Author: MixDesk contributors                                                     #
#                                                                                  #
# Permission is hereby granted, free of charge, to any person obtaining a copy     #
# of this software and associated documentation files (the "Software"), to deal    #
# in the Software without restriction, including without limitation the rights     #
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell        #
# copies of the Software, and to permit persons to whom the Software is            #
# furnished to do so, subject to the following conditions:                         #
#                                                                                  #
# The above copyright notice and this permission notice shall be included in       #
# all copies or substantial portions of the Software.                              #
#                                                                                  #
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR       #
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,         #
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE      #
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER           #
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,    #
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN        #
# THE SOFTWARE.                                                                    #
####################################################################################

import json
import struct
from hashlib import sha256

import numpy as np
import torch

from custom_exceptions import CorruptedArtifactException
from STRINGS_LIST import getString

CODEC_MAGIC = b"MXTN"
CODEC_VERSION = 1
_HEADER_LENGTH = struct.Struct("<I")


def encodeTensors(tensors: dict) -> bytes:
    """Packs named arrays into one self-describing blob.

    Layout: magic, little-endian uint32 header length, JSON header (name, dtype,
    shape, offset and size of each tensor, in insertion order), raw little-endian payload.

    Args:
        tensors (dict): name -> torch tensor or numpy array

    Returns:
        bytes: the encoded blob
    """
    entries = []
    payload = bytearray()
    for name, tensor in tensors.items():
        array = tensor.detach().cpu().numpy() if isinstance(tensor, torch.Tensor) else np.asarray(tensor)
        littleEndian = np.ascontiguousarray(array.astype(array.dtype.newbyteorder("<"), copy=False))
        raw = littleEndian.tobytes()
        entries.append(
            {
                "name": name,
                "dtype": littleEndian.dtype.str,
                "shape": list(littleEndian.shape),
                "offset": len(payload),
                "nbytes": len(raw),
            }
        )
        payload.extend(raw)

    header = json.dumps(
        {"version": CODEC_VERSION, "tensors": entries, "payload_bytes": len(payload)},
        sort_keys=True,
    ).encode("utf-8")
    return CODEC_MAGIC + _HEADER_LENGTH.pack(len(header)) + header + bytes(payload)


def decodeTensors(blob: bytes, source: str = "<memory>") -> dict:
    """Inverse of encodeTensors.

    Raises:
        CorruptedArtifactException: bad magic, unreadable header or truncated payload

    Returns:
        dict: name -> numpy array, in the encoded order
    """
    prefixLength = len(CODEC_MAGIC) + _HEADER_LENGTH.size
    if len(blob) < prefixLength or blob[: len(CODEC_MAGIC)] != CODEC_MAGIC:
        raise CorruptedArtifactException(source, getString("ERROR_UnreadableArtifact", "bad magic"))

    (headerLength,) = _HEADER_LENGTH.unpack(blob[len(CODEC_MAGIC) : prefixLength])
    try:
        header = json.loads(blob[prefixLength : prefixLength + headerLength].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CorruptedArtifactException(source, getString("ERROR_UnreadableArtifact", "bad header"))

    payload = blob[prefixLength + headerLength :]
    if len(payload) != header.get("payload_bytes"):
        raise CorruptedArtifactException(
            source,
            getString(
                "ERROR_UnreadableArtifact",
                f"payload holds {len(payload)} bytes, {header.get('payload_bytes')} expected",
            ),
        )

    tensors = {}
    for entry in header["tensors"]:
        start = entry["offset"]
        chunk = payload[start : start + entry["nbytes"]]
        array = np.frombuffer(chunk, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        tensors[entry["name"]] = array.copy()

    return tensors


def blobChecksum(*parts: bytes) -> str:
    """sha256 over the concatenation of the given byte strings."""
    digest = sha256()
    for part in parts:
        digest.update(part)
    return digest.hexdigest()


def canonicalJson(document) -> bytes:
    return json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")


def entryChecksum(specDocument: dict, weightsBlob: bytes, bnStatsDocument: list) -> str:
    """Checksum of a zoo entry: spec, weights blob and BN statistics."""
    return blobChecksum(canonicalJson(specDocument), weightsBlob, canonicalJson(bnStatsDocument))
