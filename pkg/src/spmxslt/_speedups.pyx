# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled streaming kernel; same contract as :mod:`spmxslt._pykernel`."""

from codecs import utf_8_decode

from libc.stdlib cimport free, malloc
from libc.string cimport memchr, memcmp

from ._pykernel import _BAD_CHARS, _DOCTYPE_END, _escape, _text_value
from .errors import MalformedXml, SchemaViolation

cdef bytes _BOM = b"\xef\xbb\xbf"
cdef bytes _WS = b" \t\r\n"


cdef inline bint _is_space(unsigned char c) nogil:
    # the regex \s class for bytes
    return c == 32 or (9 <= c <= 13)


cdef inline bint _is_ws(unsigned char c) nogil:
    # the characters XML treats as whitespace
    return c == 32 or c == 9 or c == 10 or c == 13


cdef inline bint _name_stop(unsigned char c) nogil:
    return _is_space(c) or c == 47 or c == 62 or c == 61 or c == 60 or c == 34 or c == 39


cdef inline bint _elem_stop(unsigned char c) nogil:
    return _name_stop(c) or c == 38 or c == 33 or c == 63


cdef inline bint _is_bad(unsigned char c) nogil:
    return c < 32 and c != 9 and c != 10 and c != 13


cdef Py_ssize_t _start_tag(const unsigned char* p, Py_ssize_t i, Py_ssize_t n,
                           Py_ssize_t* name_end, bint* empty) nogil:
    """Match a start tag at p[i] == '<'; return the index after '>' or -1."""
    cdef Py_ssize_t j = i + 1, ws
    cdef unsigned char q
    while j < n and not _elem_stop(p[j]):
        j += 1
    if j == i + 1:
        return -1
    name_end[0] = j
    while True:
        ws = j
        while j < n and _is_space(p[j]):
            j += 1
        if j >= n:
            return -1
        if p[j] == 62:
            empty[0] = False
            return j + 1
        if p[j] == 47:
            if j + 1 < n and p[j + 1] == 62:
                empty[0] = True
                return j + 2
            return -1
        if j == ws:
            return -1
        ws = j
        while j < n and not _name_stop(p[j]):
            j += 1
        if j == ws:
            return -1
        while j < n and _is_space(p[j]):
            j += 1
        if j >= n or p[j] != 61:
            return -1
        j += 1
        while j < n and _is_space(p[j]):
            j += 1
        if j >= n or (p[j] != 34 and p[j] != 39):
            return -1
        q = p[j]
        j += 1
        while j < n and p[j] != q and p[j] != 60:
            j += 1
        if j >= n or p[j] != q:
            return -1
        j += 1


cdef Py_ssize_t _end_tag(const unsigned char* p, Py_ssize_t i, Py_ssize_t n, Py_ssize_t* name_end) nogil:
    cdef Py_ssize_t j = i + 2
    while j < n and not _elem_stop(p[j]):
        j += 1
    if j == i + 2:
        return -1
    name_end[0] = j
    while j < n and _is_space(p[j]):
        j += 1
    if j < n and p[j] == 62:
        return j + 1
    return -1


cdef class _Source:
    """Refillable input buffer holding only complete, valid UTF-8."""

    cdef object read
    cdef Py_ssize_t chunk_size
    cdef bytes buf
    cdef bytes tail
    cdef Py_ssize_t pos
    cdef bint eof
    cdef bint first
    cdef Py_ssize_t bytes_in
    cdef Py_ssize_t bad_at

    def __init__(self, read, Py_ssize_t chunk_size):
        self.read = read
        self.chunk_size = chunk_size
        self.buf = b""
        self.tail = b""
        self.pos = 0
        self.eof = False
        self.first = True
        self.bytes_in = 0
        self.bad_at = -1

    cdef bint more(self) except -1:
        cdef bint got = self.pull()
        if self.first and got:
            # pull() never splits a character, so a BOM arrives whole
            self.first = False
            if self.buf.startswith(_BOM):
                self.pos = 3
        return got

    cdef bint pull(self) except -1:
        cdef Py_ssize_t used
        cdef bytes data
        while True:
            if self.bad_at >= 0:
                raise MalformedXml(f"invalid UTF-8 at byte {self.bad_at}")
            if self.eof:
                return False
            chunk = self.read(self.chunk_size)
            if not chunk:
                self.eof = True
                if self.tail:
                    raise MalformedXml("document ends inside a UTF-8 sequence")
                return False
            data = self.tail + bytes(chunk)
            try:
                used = utf_8_decode(data, "strict", False)[1]
            except UnicodeDecodeError as exc:
                used = exc.start
                self.bad_at = self.bytes_in - len(self.tail) + used
            self.bytes_in += len(chunk)
            self.tail = data[used:] if self.bad_at < 0 else b""
            if used:
                self.buf = self.buf[self.pos:] + data[:used]
                self.pos = 0
                return True


def run(plan, read, write, Py_ssize_t chunk_size=65536, Py_ssize_t flush_bytes=65536):
    """Scan the document from ``read`` and write the transformed bytes.

    Returns ``(bytes_in, bytes_out, events, peak_aux_bytes)``.
    """
    cdef dict ids = plan.ids
    cdef list names = plan.names
    cdef list start_frag = plan.start
    cdef list end_pre = plan.end_pre
    cdef list end_post = plan.end_post
    cdef Py_ssize_t ntypes = len(names)
    cdef Py_ssize_t root = plan.root
    cdef int* emit = <int*>malloc(ntypes * sizeof(int))
    cdef int* leaf = <int*>malloc(ntypes * sizeof(int))
    cdef Py_ssize_t* parent = <Py_ssize_t*>malloc(ntypes * sizeof(Py_ssize_t))
    cdef Py_ssize_t* name_len = <Py_ssize_t*>malloc(ntypes * sizeof(Py_ssize_t))
    cdef Py_ssize_t k
    if not (emit and leaf and parent and name_len):
        free(emit); free(leaf); free(parent); free(name_len)
        raise MemoryError()
    for k in range(ntypes):
        emit[k] = plan.emit[k]
        leaf[k] = plan.leaf[k]
        parent[k] = plan.parent[k]
        name_len[k] = plan.name_len[k]
    try:
        return _scan(_Source(read, chunk_size), write, flush_bytes, ids, names, start_frag, end_pre,
                     end_post, emit, leaf, parent, name_len, root)
    finally:
        free(emit); free(leaf); free(parent); free(name_len)


cdef tuple _scan(_Source src, object write, Py_ssize_t flush_bytes, dict ids, list names, list start_frag,
                 list end_pre, list end_post, int* emit, int* leaf, Py_ssize_t* parent,
                 Py_ssize_t* name_len, Py_ssize_t root):
    cdef Py_ssize_t bytes_out = 0, events = 0
    cdef bytearray out = bytearray()
    cdef list stack = []
    cdef Py_ssize_t depth = 0, stack_bytes = 0
    cdef bint seen_root = False
    cdef list pending = []
    cdef Py_ssize_t pending_len = 0, max_frag = 0, peak = 0, aux, n
    cdef Py_ssize_t pos, blen, cut, end, skip, j, name_end = 0, top, eid
    cdef bint empty = False, special, nonws
    cdef const unsigned char* p
    cdef const void* hit
    cdef bytes buf, seg, frag, name
    cdef unsigned char c, nxt
    cdef str what

    while True:
        buf = src.buf
        pos = src.pos
        blen = len(buf)
        p = <const unsigned char*>buf
        if pos >= blen:
            if not src.more():
                break
            continue

        if p[pos] != 60:
            hit = memchr(p + pos, 60, blen - pos)
            if hit == NULL:
                cut = blen
                if not src.eof:
                    j = buf.rfind(b"&", pos)
                    if j >= 0 and buf.find(b";", j) < 0:
                        cut = j
                    if cut > pos and p[cut - 1] == 13:
                        cut -= 1
                    if cut == pos:
                        src.more()
                        continue
            else:
                cut = <const unsigned char*>hit - p
            special = False
            nonws = False
            for j in range(pos, cut):
                c = p[j]
                if c == 38 or c == 13 or _is_bad(c):
                    special = True
                if not _is_ws(c):
                    nonws = True
            seg = buf[pos:cut]
            src.pos = cut
            if depth == 0:
                if nonws:
                    raise MalformedXml("character data outside the root element")
                continue
            top = stack[depth - 1]
            if emit[top]:
                if special:
                    seg = _text_value(seg)
                pending.append(seg)
                pending_len += len(seg)
            elif leaf[top]:
                if special:
                    _text_value(seg)
            elif nonws:
                if b"&" not in seg or _text_value(seg).strip(_WS):
                    raise SchemaViolation(f"character data inside element <{names[top].decode()}>")
            continue

        if blen - pos < 9 and not src.eof:
            src.more()
            continue

        nxt = p[pos + 1]
        if nxt == 47:
            end = _end_tag(p, pos, blen, &name_end)
            if end < 0:
                if src.eof or memchr(p + pos + 1, 60, blen - pos - 1) != NULL:
                    raise MalformedXml(f"malformed end tag near {buf[pos:pos + 20]!r}")
                src.more()
                continue
            if depth == 0:
                raise MalformedXml("end tag outside the root element")
            top = stack[depth - 1]
            name = names[top]
            if name_end - pos - 2 != name_len[top] or memcmp(p + pos + 2, <const char*>name, name_len[top]) != 0:
                raise MalformedXml(
                    f"end tag </{buf[pos + 2:name_end].decode(errors='replace')}> does not match <{name.decode()}>"
                )
            src.pos = end
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
            if pending_len or pending:
                pending = []
                pending_len = 0
            stack.pop()
            depth -= 1
            stack_bytes -= name_len[top]
            events += 1
            if n:
                out += frag
                bytes_out += n
                if len(out) >= flush_bytes:
                    write(bytes(out))
                    del out[:]
            continue

        if nxt == 33 or nxt == 63:
            skip = 3
            if buf.startswith(b"<!--", pos):
                end = buf.find(b"-->", pos + 4)
                what = "comment"
            elif buf.startswith(b"<![CDATA[", pos):
                end = buf.find(b"]]>", pos + 9)
                what = "CDATA section"
            elif nxt == 63:
                end = buf.find(b"?>", pos + 2)
                skip = 2
                what = "processing instruction"
            elif buf.startswith(b"<!DOCTYPE", pos):
                what = "DOCTYPE"
                if seen_root:
                    raise MalformedXml("DOCTYPE after the root element")
                j = buf.find(b">", pos)
                cut = buf.find(b"[", pos)
                if cut >= 0 and (j < 0 or cut < j):
                    m = _DOCTYPE_END.search(buf, cut)
                    if m is None:
                        end, skip = -1, 0
                    else:
                        end, skip = m.start(), m.end() - m.start()
                else:
                    end, skip = j, 1
            else:
                raise MalformedXml(f"unrecognised markup {buf[pos:pos + 9]!r}")
            if end < 0:
                if src.eof:
                    raise MalformedXml(f"document ends inside a {what}")
                src.more()
                continue
            if what == "CDATA section":
                if depth == 0:
                    raise MalformedXml("CDATA section outside the root element")
                seg = buf[pos + 9:end]
                top = stack[depth - 1]
                if _BAD_CHARS.search(seg):
                    raise MalformedXml("control character in CDATA section")
                if emit[top]:
                    if b"\r" in seg:
                        seg = seg.replace(b"\r\n", b"\n").replace(b"\r", b"\n")
                    pending.append(seg)
                    pending_len += len(seg)
                elif not leaf[top] and seg.strip(_WS):
                    raise SchemaViolation(f"character data inside element <{names[top].decode()}>")
            src.pos = end + skip
            continue

        end = _start_tag(p, pos, blen, &name_end, &empty)
        if end < 0:
            if src.eof or memchr(p + pos + 1, 60, blen - pos - 1) != NULL:
                raise MalformedXml(f"malformed start tag near {buf[pos:pos + 20]!r}")
            src.more()
            continue
        name = buf[pos + 1:name_end]
        obj = ids.get(name)
        if obj is None:
            raise SchemaViolation(f"element <{name.decode(errors='replace')}> is not declared in the DTD")
        eid = obj
        if depth:
            top = stack[depth - 1]
            if parent[eid] != top:
                raise SchemaViolation(f"<{name.decode()}> is not a child of <{names[top].decode()}>")
        else:
            if seen_root:
                raise MalformedXml("more than one root element")
            if eid != root:
                raise SchemaViolation(f"root element is <{name.decode()}>, expected <{names[root].decode()}>")
            seen_root = True
        src.pos = end
        stack.append(eid)
        depth += 1
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
        if empty:
            # <x/>: the end event follows at once, with no character data
            frag = end_pre[eid] + end_post[eid] if leaf[eid] else end_post[eid]
            n = len(frag)
            if n > max_frag:
                max_frag = n
            aux = stack_bytes + max_frag
            if aux > peak:
                peak = aux
            stack.pop()
            depth -= 1
            stack_bytes -= name_len[eid]
            events += 1
            if n:
                out += frag
                bytes_out += n
        if len(out) >= flush_bytes:
            write(bytes(out))
            del out[:]

    if depth:
        raise MalformedXml(f"document ends inside <{names[stack[depth - 1]].decode()}>")
    if not seen_root:
        raise MalformedXml("no root element")
    if out:
        write(bytes(out))
    return src.bytes_in, bytes_out, events, peak
