"""Independent evaluation of the quadrotor power model.

Uses mpmath at 50 digits and a bracketed root solve (not fixed-point
iteration) for the induced velocity, so it shares no code path with the
C++ solver. Values printed here are frozen into tests/test_power_model.cpp
and tests/acceptance.cpp.
"""
import mpmath as mp

mp.mp.dps = 50

m_b, m_e, d, r, v, F_d, eps = (mp.mpf("1.07"), mp.mpf("0.31"), mp.mpf("0.35"),
                               4, mp.mpf("6.94"), mp.mpf("4.1134"), mp.mpf("0.8"))
rho, g = mp.mpf("1.225"), mp.mpf("9.81")

weight = (m_b + m_e) * g
thrust = weight + F_d
theta = mp.atan(F_d / weight)
disk = mp.pi * d**2 * r * rho


def residual(vi, T, speed, pitch):
    return vi - 2 * T / (disk * mp.sqrt((speed * mp.cos(pitch))**2 +
                                        (speed * mp.sin(pitch) + vi)**2))


vi_fly = mp.findroot(lambda x: residual(x, thrust, v, theta),
                     (mp.mpf("0.01"), mp.mpf("50")), solver="anderson")
p_fly = (v * mp.sin(theta) + vi_fly) * thrust / eps
vi_hover = mp.sqrt(2 * weight / disk)
p_hover = weight**mp.mpf(1.5) / (eps * mp.sqrt(disk / 2))

print("weight      ", mp.nstr(weight, 17))
print("thrust      ", mp.nstr(thrust, 17))
print("pitch       ", mp.nstr(theta, 17))
print("vi_flying   ", mp.nstr(vi_fly, 17))
print("vi_hover    ", mp.nstr(vi_hover, 17))
print("P_flying    ", mp.nstr(p_fly, 17))
print("P_hover     ", mp.nstr(p_hover, 17))
print("vi_hover*T/eps", mp.nstr(vi_hover * weight / eps, 17))
print("endurance_s ", mp.nstr(mp.mpf(275000) / p_fly, 17))
