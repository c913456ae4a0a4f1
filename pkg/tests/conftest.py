pytest_plugins = ("coincidence", "sqglab.testing")
