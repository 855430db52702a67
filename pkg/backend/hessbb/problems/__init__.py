# Problem file loading
