static int ring_attach_buffer(struct ring *ring, struct ring_buf *buf)
{
    int err;

    buf_get(buf);
    err = ring_map_buffer(ring, buf);
    if (err) {
        kfree(buf);
        return err;
    }

    ring->nr_bufs++;
    return 0;
}
