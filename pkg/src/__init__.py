# COFTRL lab
