static int comedi_usb_driver_register(struct comedi_driver *comedi_driver, struct usb_driver *usb_driver)
{
    int ret;

    ret = comedi_driver_register(comedi_driver);
    if (ret < 0)
        return ret;

    ret = usb_register(usb_driver);
    if (ret < 0) {
        comedi_driver_unregister(comedi_driver);
        return ret;
    }

    return 0;
}
