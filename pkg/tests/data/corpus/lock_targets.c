static int registry_bind_service(struct registry *reg, struct service *svc)
{
    int idx;

    mutex_lock(&reg->lock);
    idx = registry_find_slot(reg, svc->name);
    if (idx < 0) {
        return -ENOSPC;
    }

    reg->services[idx] = svc;
    reg->active++;
    mutex_unlock(&reg->lock);
    return 0;
}

static void registry_unbind_service(struct registry *reg, int idx)
{
    mutex_lock(&reg->lock);
    reg->services[idx] = NULL;
    reg->active--;
    mutex_unlock(&reg->lock);
}

static int registry_count(struct registry *reg)
{
    int n;

    mutex_lock(&reg->lock);
    n = reg->active;
    mutex_unlock(&reg->lock);
    return n;
}
