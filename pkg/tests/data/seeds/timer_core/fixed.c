static int snd_timer_dev_register(struct snd_timer *timer, int card_id)
{
    int err;

    init_core(&timer->core);
    timer->card_id = card_id;

    err = core_register(&timer->core);
    if (err < 0) {
        core_release(&timer->core);
        return err;
    }

    snd_timer_count++;
    return 0;
}
