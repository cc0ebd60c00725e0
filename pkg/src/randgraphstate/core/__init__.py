# Core computational modules
