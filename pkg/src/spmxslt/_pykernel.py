"""Pure-Python streaming kernel.

Fallback for :mod:`spmxslt._speedups`; both implement the same scanner and
must agree byte-for-byte on output, statistics and error classes.
"""

import re
from codecs import utf_8_decode

from .errors import MalformedXml, SchemaViolation

_BOM = b"\xef\xbb\xbf"
_WS = b" \t\r\n"
_START_TAG = re.compile(
    rb"<([^\s/>=<\"'&!?]+)((?:\s+[^\s/>=<\"']+\s*=\s*(?:\"[^\"<]*\"|'[^'<]*'))*)\s*(/?)>"
)
_END_TAG = re.compile(rb"</([^\s/>=<\"'&!?]+)\s*>")
_DOCTYPE_END = re.compile(rb"\]\s*>")
_BAD_CHARS = re.compile(rb"[\x00-\x08\x0b\x0c\x0e-\x1f]")
_REF = re.compile(rb"(#x[0-9a-fA-F]+|#[0-9]+|lt|gt|amp|apos|quot);")
_NAMED = {b"lt": b"<", b"gt": b">", b"amp": b"&", b"apos": b"'", b"quot": b'"'}


def _char_ref(body: bytes) -> bytes:
    code = int(body[2:], 16) if body[1:2] == b"x" else int(body[1:])
    ok = code in (0x9, 0xA, 0xD) or 0x20 <= code <= 0xD7FF or 0xE000 <= code <= 0xFFFD \
        or 0x10000 <= code <= 0x10FFFF
    if not ok:
        raise MalformedXml(f"character reference &{body.decode()}; is not a legal XML character")
    return chr(code).encode("utf-8")


def _resolve_refs(seg: bytes) -> bytes:
    head, *rest = seg.split(b"&")
    parts = [head]
    for part in rest:
        m = _REF.match(part)
        if m is None:
            raise MalformedXml(f"bad or unsupported entity reference near {b'&' + part[:12]!r}")
        body = m.group(1)
        parts.append(_NAMED[body] if body in _NAMED else _char_ref(body))
        parts.append(part[m.end():])
    return b"".join(parts)


def _text_value(seg: bytes) -> bytes:
    if _BAD_CHARS.search(seg):
        raise MalformedXml("control character in character data")
    if b"\r" in seg:
        seg = seg.replace(b"\r\n", b"\n").replace(b"\r", b"\n")
    if b"&" in seg:
        seg = _resolve_refs(seg)
    return seg


def _escape(data: bytes) -> bytes:
    return data.replace(b"&", b"&amp;").replace(b"<", b"&lt;").replace(b">", b"&gt;")


def run(plan, read, write, chunk_size=65536, flush_bytes=65536):
    """Scan the document from ``read`` and write the transformed bytes.

    Returns ``(bytes_in, bytes_out, events, peak_aux_bytes)``.
    """
    ids = plan.ids
    names = plan.names
    start_frag = plan.start
    end_pre = plan.end_pre
    end_post = plan.end_post
    emit = plan.emit
    leaf = plan.leaf
    parent = plan.parent
    name_len = plan.name_len
    root = plan.root

    buf = b""
    pos = 0
    eof = False
    first = True
    bytes_in = 0
    tail = b""  # incomplete UTF-8 sequence held back from the scanner
    bad_at = -1

    def pull():
        # append the next run of complete, valid UTF-8 to buf
        nonlocal buf, pos, eof, bytes_in, tail, bad_at
        while True:
            if bad_at >= 0:
                raise MalformedXml(f"invalid UTF-8 at byte {bad_at}")
            if eof:
                return False
            chunk = read(chunk_size)
            if not chunk:
                eof = True
                if tail:
                    raise MalformedXml("document ends inside a UTF-8 sequence")
                return False
            data = tail + chunk
            try:
                used = utf_8_decode(data, "strict", False)[1]
            except UnicodeDecodeError as exc:
                used = exc.start
                bad_at = bytes_in - len(tail) + used
            bytes_in += len(chunk)
            tail = data[used:] if bad_at < 0 else b""
            if used:
                buf = buf[pos:] + data[:used]
                pos = 0
                return True

    def more():
        nonlocal pos, first
        got = pull()
        if first and got:
            # pull() never splits a character, so a BOM arrives whole
            first = False
            if buf.startswith(_BOM):
                pos = 3
        return got

    bytes_out = 0
    events = 0
    out = bytearray()
    stack = []
    stack_bytes = 0
    seen_root = False
    pending = []
    pending_len = 0
    max_frag = 0
    peak = 0

    while True:
        if pos >= len(buf):
            if not more():
                break
            continue

        if buf[pos] != 0x3C:
            # character data, up to the next '<' or a safe cut at the buffer end
            cut = buf.find(b"<", pos)
            if cut < 0:
                cut = len(buf)
                if not eof:
                    amp = buf.rfind(b"&", pos)
                    if amp >= 0 and buf.find(b";", amp) < 0:
                        cut = amp
                    if cut > pos and buf[cut - 1] == 0x0D:
                        cut -= 1
                    if cut == pos:
                        more()
                        continue
            seg = buf[pos:cut]
            pos = cut
            if not stack:
                if seg.strip(_WS):
                    raise MalformedXml("character data outside the root element")
                continue
            top = stack[-1]
            if emit[top]:
                seg = _text_value(seg)
                pending.append(seg)
                pending_len += len(seg)
            elif leaf[top]:
                _text_value(seg)
            elif seg.strip(_WS):
                if b"&" not in seg or _text_value(seg).strip(_WS):
                    raise SchemaViolation(f"character data inside element <{names[top].decode()}>")
            continue

        if len(buf) - pos < 9 and not eof:
            more()
            continue

        nxt = buf[pos + 1:pos + 2]
        if nxt == b"/":
            m = _END_TAG.match(buf, pos)
            if m is None:
                if eof or buf.find(b"<", pos + 1) >= 0:
                    raise MalformedXml(f"malformed end tag near {buf[pos:pos + 20]!r}")
                more()
                continue
            if not stack:
                raise MalformedXml("end tag outside the root element")
            top = stack[-1]
            if m.group(1) != names[top]:
                raise MalformedXml(
                    f"end tag </{m.group(1).decode(errors='replace')}> does not match <{names[top].decode()}>"
                )
            pos = m.end()
            if leaf[top]:
                if emit[top]:
                    frag = end_pre[top] + _escape(b"".join(pending)) + end_post[top]
                else:
                    frag = end_pre[top] + end_post[top]
            else:
                frag = end_post[top]
            n = len(frag)
            if n > max_frag:
                max_frag = n
            aux = stack_bytes + pending_len + max_frag
            if aux > peak:
                peak = aux
            pending = []
            pending_len = 0
            stack.pop()
            stack_bytes -= name_len[top]
            events += 1
            if n:
                out += frag
                bytes_out += n
                if len(out) >= flush_bytes:
                    write(bytes(out))
                    out.clear()
            continue

        if nxt == b"!" or nxt == b"?":
            skip = 3
            if buf.startswith(b"<!--", pos):
                end = buf.find(b"-->", pos + 4)
                what = "comment"
            elif buf.startswith(b"<![CDATA[", pos):
                end = buf.find(b"]]>", pos + 9)
                what = "CDATA section"
            elif nxt == b"?":
                end = buf.find(b"?>", pos + 2)
                skip = 2
                what = "processing instruction"
            elif buf.startswith(b"<!DOCTYPE", pos):
                what = "DOCTYPE"
                if seen_root:
                    raise MalformedXml("DOCTYPE after the root element")
                gt = buf.find(b">", pos)
                br = buf.find(b"[", pos)
                if br >= 0 and (gt < 0 or br < gt):
                    m = _DOCTYPE_END.search(buf, br)
                    end, skip = (m.start(), m.end() - m.start()) if m else (-1, 0)
                else:
                    end, skip = gt, 1
            else:
                raise MalformedXml(f"unrecognised markup {buf[pos:pos + 9]!r}")
            if end < 0:
                if eof:
                    raise MalformedXml(f"document ends inside a {what}")
                more()
                continue
            if what == "CDATA section":
                if not stack:
                    raise MalformedXml("CDATA section outside the root element")
                seg = buf[pos + 9:end]
                top = stack[-1]
                if _BAD_CHARS.search(seg):
                    raise MalformedXml("control character in CDATA section")
                if emit[top]:
                    if b"\r" in seg:
                        seg = seg.replace(b"\r\n", b"\n").replace(b"\r", b"\n")
                    pending.append(seg)
                    pending_len += len(seg)
                elif not leaf[top] and seg.strip(_WS):
                    raise SchemaViolation(f"character data inside element <{names[top].decode()}>")
            pos = end + skip
            continue

        m = _START_TAG.match(buf, pos)
        if m is None:
            if eof or buf.find(b"<", pos + 1) >= 0:
                raise MalformedXml(f"malformed start tag near {buf[pos:pos + 20]!r}")
            more()
            continue
        name = m.group(1)
        eid = ids.get(name)
        if eid is None:
            raise SchemaViolation(f"element <{name.decode(errors='replace')}> is not declared in the DTD")
        if stack:
            top = stack[-1]
            if parent[eid] != top:
                raise SchemaViolation(f"<{name.decode()}> is not a child of <{names[top].decode()}>")
        else:
            if seen_root:
                raise MalformedXml("more than one root element")
            if eid != root:
                raise SchemaViolation(f"root element is <{name.decode()}>, expected <{names[root].decode()}>")
            seen_root = True
        pos = m.end()
        stack.append(eid)
        stack_bytes += name_len[eid]
        frag = start_frag[eid]
        n = len(frag)
        if n > max_frag:
            max_frag = n
        aux = stack_bytes + pending_len + max_frag
        if aux > peak:
            peak = aux
        events += 1
        if n:
            out += frag
            bytes_out += n
        if m.group(3):
            # <x/>: the end event follows at once, with no character data
            frag = end_pre[eid] + end_post[eid] if leaf[eid] else end_post[eid]
            n = len(frag)
            if n > max_frag:
                max_frag = n
            aux = stack_bytes + max_frag
            if aux > peak:
                peak = aux
            stack.pop()
            stack_bytes -= name_len[eid]
            events += 1
            if n:
                out += frag
                bytes_out += n
        if len(out) >= flush_bytes:
            write(bytes(out))
            out.clear()

    if stack:
        raise MalformedXml(f"document ends inside <{names[stack[-1]].decode()}>")
    if not seen_root:
        raise MalformedXml("no root element")
    if out:
        write(bytes(out))
    return bytes_in, bytes_out, events, peak
