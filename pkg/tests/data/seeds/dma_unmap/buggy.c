static int stream_submit_buffer(struct stream_dev *sdev, void *data, int len)
{
    dma_addr_t addr;
    int ret;

    addr = dma_map_single(sdev->dma_dev, data, len, DMA_TO_DEVICE);
    if (dma_mapping_error(sdev->dma_dev, addr))
        return -EIO;

    ret = stream_queue_dma(sdev, addr, len);
    if (ret) {
        return ret;
    }

    sdev->pending++;
    return 0;
}
