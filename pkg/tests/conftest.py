from heraldstats import ClickDetectorArray, HeraldConfig, nbar_from_car


def detector(mu_h, n=4, nu=5e-4):
    return ClickDetectorArray(efficiency=mu_h, num_detectors=n, dark_count_prob=nu)


def config(car, clicks, mu_h, n=4, nu=5e-4):
    return HeraldConfig(nbar_from_car(car), detector(mu_h, n, nu), clicks)
